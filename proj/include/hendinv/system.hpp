#ifndef HENDINV_SYSTEM_HPP
#define HENDINV_SYSTEM_HPP

#include <array>
#include <cstddef>
#include <variant>
#include <vector>

#include "hendinv/energy.hpp"
#include "hendinv/potentials.hpp"

namespace hendinv {

// Point in up to three dimensions; unused components stay zero.
using Point = std::array<double, 3>;

enum class Boundary { free, periodic };

// Box Lambda_ell = [-ell, ell]^d.
struct BoxSpec {
    int dim = 1;
    double half_width = 1.0;
    Boundary boundary = Boundary::free;

    double side() const { return 2.0 * half_width; }
    double volume() const {
        double v = 1.0;
        for (int k = 0; k < dim; ++k) v *= side();
        return v;
    }
    bool contains(const Point& p) const {
        for (int k = 0; k < dim; ++k) {
            double x = p[static_cast<std::size_t>(k)];
            if (x < -half_width || x > half_width) return false;
        }
        return true;
    }
    // Wrap into [-ell, ell) componentwise (periodic mode).
    Point wrap(Point p) const;
    // Squared distance; minimum image in periodic mode, raw otherwise.
    double distance_sq(const Point& a, const Point& b) const;
    double distance(const Point& a, const Point& b) const;

    void validate() const;
    // Periodic boxes must fit one full cutoff sphere without self-images.
    void validate_against(const PairPotential& pot) const;
};

// Finite particle configuration inside a box. Observables are permutation
// invariant; positions carry no ordering semantics.
struct Configuration {
    std::vector<Point> positions;
    BoxSpec box;

    std::size_t size() const { return positions.size(); }
    bool valid() const {
        for (const auto& p : positions)
            if (!box.contains(p)) return false;
        return true;
    }
};

// Uniform grid of cells with side >= interaction cutoff; supports
// incremental insert/erase/move and neighbor-candidate enumeration.
class CellList {
public:
    CellList(const BoxSpec& box, double cutoff);

    void build(const std::vector<Point>& positions);
    void insert(std::size_t index, const Point& p);
    void erase(std::size_t index, const Point& p);
    // Renumber: particle `from` takes index `to` (used after swap-remove).
    void reindex(std::size_t from, std::size_t to, const Point& p);

    // Candidate neighbor indices around x (superset of all particles within
    // the cutoff of x; exactness of within-cutoff membership is up to the
    // caller's distance test).
    template <typename F>
    void for_each_candidate(const Point& x, F&& f) const {
        for (int c : neighbor_cells(cell_of(x)))
            for (std::size_t idx : cells_[static_cast<std::size_t>(c)]) f(idx);
    }

    std::size_t cell_count() const { return cells_.size(); }
    const std::vector<std::vector<std::size_t>>& cells() const { return cells_; }
    int cell_of(const Point& p) const;

private:
    std::vector<int> neighbor_cells(int cell) const;

    BoxSpec box_;
    std::array<int, 3> n_{1, 1, 1};
    std::vector<std::vector<std::size_t>> cells_;
};

// H_u(x_m) = sum over unordered pairs of u(|x_i - x_j|).
Energy hamiltonian(const Configuration& config, const PairPotential& pot);

// W_u(x; gamma) = sum over members of u(|x - y|); +infinity on core overlap.
// `exclude` skips one member index (move evaluation); pass npos for none.
Energy interaction_energy(const Point& x, const Configuration& config,
                          const PairPotential& pot,
                          std::size_t exclude = static_cast<std::size_t>(-1),
                          const CellList* cells = nullptr);

struct MoveInsert {
    Point x;
};
struct MoveDelete {
    std::size_t index;
};
struct MoveDisplace {
    std::size_t index;
    Point to;
};
using Move = std::variant<MoveInsert, MoveDelete, MoveDisplace>;

// Energy difference hamiltonian(after) - hamiltonian(before). Insertion into
// an overlap is +infinity; deletions are always finite in lawful states.
Energy delta_energy(const Configuration& config, const PairPotential& pot,
                    const Move& move, const CellList* cells = nullptr);

} // namespace hendinv

#endif
