#include "hendinv/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hendinv {

Point BoxSpec::wrap(Point p) const {
    const double L = side();
    for (int k = 0; k < dim; ++k) {
        double& x = p[static_cast<std::size_t>(k)];
        x -= L * std::floor((x + half_width) / L);
    }
    return p;
}

double BoxSpec::distance_sq(const Point& a, const Point& b) const {
    const double L = side();
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
        double dx = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
        if (boundary == Boundary::periodic) dx -= L * std::round(dx / L);
        r2 += dx * dx;
    }
    return r2;
}

double BoxSpec::distance(const Point& a, const Point& b) const {
    return std::sqrt(distance_sq(a, b));
}

void BoxSpec::validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("box: dim must be 1, 2 or 3");
    if (!(half_width > 0.0)) throw std::invalid_argument("box: half_width must be positive");
}

void BoxSpec::validate_against(const PairPotential& pot) const {
    validate();
    if (boundary == Boundary::periodic && side() < 2.0 * pot.cutoff_radius())
        throw std::invalid_argument(
            "box: periodic mode requires 2*ell >= 2*cutoff (unique minimum image)");
}

CellList::CellList(const BoxSpec& box, double cutoff) : box_(box) {
    box_.validate();
    std::size_t total = 1;
    for (int k = 0; k < 3; ++k) {
        if (k < box_.dim && cutoff > 0.0) {
            int n = static_cast<int>(std::floor(box_.side() / cutoff));
            n_[static_cast<std::size_t>(k)] = std::max(1, n);
        } else {
            n_[static_cast<std::size_t>(k)] = 1;
        }
        total *= static_cast<std::size_t>(n_[static_cast<std::size_t>(k)]);
    }
    cells_.assign(total, {});
}

int CellList::cell_of(const Point& p) const {
    int id = 0;
    for (int k = 0; k < box_.dim; ++k) {
        auto ks = static_cast<std::size_t>(k);
        double t = (p[ks] + box_.half_width) / box_.side(); // in [0, 1]
        int c = static_cast<int>(t * n_[ks]);
        c = std::clamp(c, 0, n_[ks] - 1);
        id = id * n_[ks] + c;
    }
    return id;
}

std::vector<int> CellList::neighbor_cells(int cell) const {
    // Decompose the flat id, offset each axis by -1..1, re-encode;
    // duplicates from wrap collisions in tiny grids are removed.
    std::array<int, 3> coord{0, 0, 0};
    int rest = cell;
    for (int k = box_.dim - 1; k >= 0; --k) {
        auto ks = static_cast<std::size_t>(k);
        coord[ks] = rest % n_[ks];
        rest /= n_[ks];
    }
    std::vector<int> out;
    std::array<int, 3> off{0, 0, 0};
    int combos = 1;
    for (int k = 0; k < box_.dim; ++k) combos *= 3;
    for (int c = 0; c < combos; ++c) {
        int t = c;
        bool ok = true;
        for (int k = 0; k < box_.dim; ++k) {
            off[static_cast<std::size_t>(k)] = t % 3 - 1;
            t /= 3;
        }
        int id = 0;
        for (int k = 0; k < box_.dim && ok; ++k) {
            auto ks = static_cast<std::size_t>(k);
            int c2 = coord[ks] + off[ks];
            if (box_.boundary == Boundary::periodic) {
                c2 = (c2 % n_[ks] + n_[ks]) % n_[ks];
            } else if (c2 < 0 || c2 >= n_[ks]) {
                ok = false;
            }
            id = id * n_[ks] + c2;
        }
        if (ok) out.push_back(id);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void CellList::build(const std::vector<Point>& positions) {
    for (auto& c : cells_) c.clear();
    for (std::size_t i = 0; i < positions.size(); ++i) insert(i, positions[i]);
}

void CellList::insert(std::size_t index, const Point& p) {
    cells_[static_cast<std::size_t>(cell_of(p))].push_back(index);
}

void CellList::erase(std::size_t index, const Point& p) {
    auto& cell = cells_[static_cast<std::size_t>(cell_of(p))];
    auto it = std::find(cell.begin(), cell.end(), index);
    if (it == cell.end()) throw std::logic_error("cell list: erase of absent index");
    cell.erase(it);
}

void CellList::reindex(std::size_t from, std::size_t to, const Point& p) {
    auto& cell = cells_[static_cast<std::size_t>(cell_of(p))];
    auto it = std::find(cell.begin(), cell.end(), from);
    if (it == cell.end()) throw std::logic_error("cell list: reindex of absent index");
    *it = to;
}

Energy hamiltonian(const Configuration& config, const PairPotential& pot) {
    Energy h(0.0);
    const auto& pos = config.positions;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        for (std::size_t j = i + 1; j < pos.size(); ++j) {
            h += pot.evaluate(config.box.distance(pos[i], pos[j]));
            if (h.is_infinite()) return h;
        }
    }
    return h;
}

Energy interaction_energy(const Point& x, const Configuration& config,
                          const PairPotential& pot, std::size_t exclude,
                          const CellList* cells) {
    Energy w(0.0);
    auto accumulate = [&](std::size_t j) {
        if (j == exclude || w.is_infinite()) return;
        w += pot.evaluate(config.box.distance(x, config.positions[j]));
    };
    if (cells) {
        cells->for_each_candidate(x, accumulate);
    } else {
        for (std::size_t j = 0; j < config.positions.size(); ++j) accumulate(j);
    }
    return w;
}

Energy delta_energy(const Configuration& config, const PairPotential& pot,
                    const Move& move, const CellList* cells) {
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    if (const auto* ins = std::get_if<MoveInsert>(&move)) {
        return interaction_energy(ins->x, config, pot, npos, cells);
    }
    if (const auto* del = std::get_if<MoveDelete>(&move)) {
        if (del->index >= config.size())
            throw std::out_of_range("delta_energy: delete index out of range");
        Energy w = interaction_energy(config.positions[del->index], config, pot,
                                      del->index, cells);
        if (w.is_infinite())
            throw std::logic_error("delta_energy: delete from an overlapping state");
        return Energy(-w.value());
    }
    const auto& dis = std::get<MoveDisplace>(move);
    if (dis.index >= config.size())
        throw std::out_of_range("delta_energy: displace index out of range");
    Energy w_new = interaction_energy(dis.to, config, pot, dis.index, cells);
    if (w_new.is_infinite()) return w_new;
    Energy w_old = interaction_energy(config.positions[dis.index], config, pot,
                                      dis.index, cells);
    return Energy(w_new.value() - w_old.value());
}

} // namespace hendinv
