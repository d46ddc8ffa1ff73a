#include "hendinv/config.hpp"

#include <fstream>

#include "hendinv/errors.hpp"
#include "hendinv/io.hpp"
#include "hendinv/numeric.hpp"

namespace hendinv {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) known = true;
        if (known) continue;
        std::string best;
        std::size_t best_d = 4;
        for (const char* a : allowed) {
            std::string s(a);
            std::size_t d = edit_distance({it.key().data(), it.key().size()},
                                          {s.data(), s.size()});
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        std::string msg = where + ": unknown key '" + it.key() + "'";
        if (!best.empty()) msg += " (did you mean '" + best + "'?)";
        throw ConfigError(msg);
    }
}

double require_positive(double v, const std::string& field) {
    if (!(v > 0.0)) throw ConfigError(field + ": must be positive");
    return v;
}

} // namespace

ChainSpec RunConfig::chain_spec() const {
    ChainSpec spec;
    spec.box = box;
    spec.beta = beta;
    spec.mu = mu;
    spec.potential = potential;
    spec.moves = moves;
    spec.max_displacement = max_displacement;
    spec.auto_tune = auto_tune;
    spec.steps = steps;
    spec.burn_in = burn_in;
    spec.thin = thin;
    spec.blocks = blocks;
    spec.seed = seed.value_or(0);
    return spec;
}

RunConfig parse_config_json(const json& j) {
    reject_unknown(j,
                   {"format_version", "dim", "ell", "boundary", "beta", "mu",
                    "potential", "certificate", "moves", "run", "seed", "binning",
                    "solver", "oracle", "workers"},
                   "config");
    RunConfig cfg;

    json boxj;
    boxj["dim"] = j.value("dim", 1);
    boxj["ell"] = j.value("ell", 1.0);
    boxj["boundary"] = j.value("boundary", "free");
    cfg.box = box_from_json(boxj);

    cfg.beta = j.value("beta", 1.0);
    if (!(cfg.beta > 0.0)) throw ConfigError("beta: must be positive");
    cfg.mu = j.value("mu", 0.0);

    if (j.contains("potential")) cfg.potential = potential_from_json(j.at("potential"));
    if (j.contains("certificate")) {
        cfg.certificate = certificate_from_json(j.at("certificate"));
        cfg.potential.attach_certificate(*cfg.certificate);
    }

    if (j.contains("moves")) {
        const json& m = j.at("moves");
        reject_unknown(m,
                       {"p_insert", "p_delete", "p_displace", "max_displacement",
                        "auto_tune"},
                       "moves");
        cfg.moves.p_insert = m.value("p_insert", 0.25);
        cfg.moves.p_delete = m.value("p_delete", 0.25);
        cfg.moves.p_displace = m.value("p_displace", 0.5);
        cfg.max_displacement =
            require_positive(m.value("max_displacement", 0.5), "moves.max_displacement");
        cfg.auto_tune = m.value("auto_tune", true);
    }

    if (j.contains("run")) {
        const json& r = j.at("run");
        reject_unknown(r, {"steps", "burn_in", "thin", "blocks"}, "run");
        cfg.steps = r.value("steps", 100000ULL);
        cfg.burn_in = r.value("burn_in", 10000ULL);
        cfg.thin = r.value("thin", 10ULL);
        cfg.blocks = r.value("blocks", std::size_t{32});
        if (cfg.thin == 0) throw ConfigError("run.thin: must be >= 1");
        if (cfg.burn_in > cfg.steps) throw ConfigError("run.burn_in: exceeds run.steps");
        if (cfg.blocks < 32) throw ConfigError("run.blocks: must be >= 32");
    }

    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("binning")) {
        const json& b = j.at("binning");
        reject_unknown(b, {"bins", "r_max"}, "binning");
        cfg.binning.bins = b.value("bins", std::size_t{200});
        cfg.binning.r_max = require_positive(b.value("r_max", 4.0), "binning.r_max");
        if (cfg.binning.bins == 0) throw ConfigError("binning.bins: must be >= 1");
    } else {
        cfg.binning.bins = 200;
        cfg.binning.r_max = std::min(4.0 * cfg.potential.length_scale(),
                                     cfg.box.half_width);
    }

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        reject_unknown(s,
                       {"alpha", "max_iters", "tolerance", "mask_epsilon",
                        "match_density", "density_target"},
                       "solver");
        cfg.solver_alpha = s.value("alpha", 0.2);
        cfg.solver_max_iters = s.value("max_iters", 50);
        if (s.contains("tolerance") && !s.at("tolerance").is_null())
            cfg.solver_tolerance = s.at("tolerance").get<double>();
        cfg.solver_mask_epsilon = s.value("mask_epsilon", 1.0e-6);
        cfg.solver_match_density = s.value("match_density", false);
        cfg.solver_density_target = s.value("density_target", 0.0);
        if (cfg.solver_max_iters < 1) throw ConfigError("solver.max_iters: must be >= 1");
        if (!(cfg.solver_alpha >= 0.0)) throw ConfigError("solver.alpha: must be >= 0");
    }

    if (j.contains("oracle")) {
        const json& o = j.at("oracle");
        reject_unknown(o,
                       {"scheme", "points_per_axis", "refinement_levels", "tolerance",
                        "n_max_cap", "cost_ceiling", "stability_b"},
                       "oracle");
        std::string scheme = o.value("scheme", "gauss_legendre");
        if (scheme == "gauss_legendre")
            cfg.quad.scheme = QuadratureSpec::Scheme::gauss_legendre;
        else if (scheme == "midpoint")
            cfg.quad.scheme = QuadratureSpec::Scheme::midpoint;
        else
            throw ConfigError("oracle.scheme: expected 'gauss_legendre' or 'midpoint'");
        cfg.quad.points_per_axis = o.value("points_per_axis", 8);
        cfg.quad.refinement_levels = o.value("refinement_levels", 2);
        cfg.quad.validate();
        cfg.trunc.tolerance =
            require_positive(o.value("tolerance", 1.0e-9), "oracle.tolerance");
        cfg.trunc.n_max_cap = o.value("n_max_cap", 64);
        cfg.trunc.cost_ceiling = o.value("cost_ceiling", 400000000ULL);
        if (o.contains("stability_b")) cfg.stability_B = o.at("stability_b").get<double>();
    }

    cfg.workers = j.value("workers", 1);
    if (cfg.workers < 1) throw ConfigError("workers: must be >= 1");

    // Echo the fully resolved configuration.
    json r;
    r["format_version"] = kFormatVersion;
    r["dim"] = cfg.box.dim;
    r["ell"] = cfg.box.half_width;
    r["boundary"] = cfg.box.boundary == Boundary::free ? "free" : "periodic";
    r["beta"] = cfg.beta;
    r["mu"] = cfg.mu;
    r["potential"] = potential_to_json(cfg.potential);
    if (cfg.certificate) r["certificate"] = certificate_to_json(*cfg.certificate);
    r["moves"] = {{"p_insert", cfg.moves.p_insert},
                  {"p_delete", cfg.moves.p_delete},
                  {"p_displace", cfg.moves.p_displace},
                  {"max_displacement", cfg.max_displacement},
                  {"auto_tune", cfg.auto_tune}};
    r["run"] = {{"steps", cfg.steps},
                {"burn_in", cfg.burn_in},
                {"thin", cfg.thin},
                {"blocks", cfg.blocks}};
    if (cfg.seed) r["seed"] = *cfg.seed;
    r["binning"] = {{"bins", cfg.binning.bins}, {"r_max", cfg.binning.r_max}};
    r["solver"] = {{"alpha", cfg.solver_alpha},
                   {"max_iters", cfg.solver_max_iters},
                   {"mask_epsilon", cfg.solver_mask_epsilon},
                   {"match_density", cfg.solver_match_density},
                   {"density_target", cfg.solver_density_target}};
    if (cfg.solver_tolerance) r["solver"]["tolerance"] = *cfg.solver_tolerance;
    r["oracle"] = {{"scheme", cfg.quad.scheme == QuadratureSpec::Scheme::midpoint
                                  ? "midpoint"
                                  : "gauss_legendre"},
                   {"points_per_axis", cfg.quad.points_per_axis},
                   {"refinement_levels", cfg.quad.refinement_levels},
                   {"tolerance", cfg.trunc.tolerance},
                   {"n_max_cap", cfg.trunc.n_max_cap},
                   {"cost_ceiling", cfg.trunc.cost_ceiling}};
    if (cfg.stability_B) r["oracle"]["stability_b"] = *cfg.stability_B;
    r["workers"] = cfg.workers;
    cfg.resolved = r;
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path);
    return parse_config_json(j);
}

} // namespace hendinv
