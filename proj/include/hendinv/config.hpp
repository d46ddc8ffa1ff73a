#ifndef HENDINV_CONFIG_HPP
#define HENDINV_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "hendinv/estimators.hpp"
#include "hendinv/gcmc.hpp"
#include "hendinv/oracle.hpp"
#include "hendinv/potentials.hpp"

namespace hendinv {

// Fully resolved run configuration. Unknown keys are rejected with a
// suggestion; defaults are applied and echoed back via `resolved` so every
// artifact can embed the exact configuration that produced it.
struct RunConfig {
    BoxSpec box;
    double beta = 1.0;
    double mu = 0.0;
    PairPotential potential = PairPotential::ideal_gas();
    std::optional<AdmissibilityCertificate> certificate;

    MoveMix moves;
    double max_displacement = 0.5;
    bool auto_tune = true;
    std::uint64_t steps = 100000;
    std::uint64_t burn_in = 10000;
    std::uint64_t thin = 10;
    std::size_t blocks = 32;
    std::optional<std::uint64_t> seed;

    Binning binning;

    double solver_alpha = 0.2;
    int solver_max_iters = 50;
    std::optional<double> solver_tolerance;
    double solver_mask_epsilon = 1.0e-6;
    bool solver_match_density = false;
    double solver_density_target = 0.0;

    QuadratureSpec quad;
    TruncationSpec trunc;
    std::optional<double> stability_B; // auto-estimated when absent

    int workers = 1;

    nlohmann::json resolved;

    ChainSpec chain_spec() const;
};

RunConfig parse_config_json(const nlohmann::json& j);
RunConfig parse_config(const std::string& path);

} // namespace hendinv

#endif
