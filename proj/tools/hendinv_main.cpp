// hendinv: grand-canonical pair-potential toolkit.
//
// Subcommands: validate, oracle, simulate, rdf, thermo, invert, uniqueness.
// Exit codes: 0 success, 1 computation refused/failed, 2 usage or config
// error. Diagnostics go to stderr; data artifacts go to files (validate
// prints its report to stdout).

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hendinv/config.hpp"
#include "hendinv/errors.hpp"
#include "hendinv/estimators.hpp"
#include "hendinv/gcmc.hpp"
#include "hendinv/inverse.hpp"
#include "hendinv/io.hpp"
#include "hendinv/oracle.hpp"
#include "hendinv/thermo.hpp"

using nlohmann::json;
using namespace hendinv;

namespace {

json load_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string(what) + ": cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw ConfigError(std::string(what) + ": invalid JSON in " + path);
    return j;
}

std::uint64_t resolve_seed(const RunConfig& cfg, std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (cfg.seed) return *cfg.seed;
    throw ConfigError("no seed: pass --seed or set \"seed\" in the config "
                      "(silent nondeterminism is not allowed)");
}

double resolve_stability_B(const RunConfig& cfg, std::optional<std::uint64_t> seed_flag) {
    if (cfg.stability_B) return *cfg.stability_B;
    const PairPotential& pot = cfg.potential;
    if (pot.is_nonnegative() || pot.hard_core_radius() > 0.0) {
        StabilityCertificate cert =
            estimate_stability_constant(pot, cfg.box.dim, 0, 0);
        return cert.B;
    }
    std::uint64_t seed = resolve_seed(cfg, seed_flag);
    StabilityCertificate cert = estimate_stability_constant(
        pot, cfg.box.dim, 20000, derive_seed(seed, 0x57ab111ull));
    return cert.B;
}

json value_bound_json(const ValueWithBound& v) {
    return {{"value", v.value}, {"bound", v.bound}};
}

int cmd_validate(const std::string& pot_path, const std::string& cert_path,
                 int dim, std::uint64_t stability_budget,
                 std::optional<std::uint64_t> seed) {
    PairPotential pot = potential_from_json(load_json_file(pot_path, "potential"));
    AdmissibilityCertificate cert =
        certificate_from_json(load_json_file(cert_path, "certificate"));
    AdmissibilityReport rep = validate_admissibility(pot, cert, dim);

    json out;
    out["format_version"] = kFormatVersion;
    out["potential"] = potential_to_json(pot);
    out["certificate"] = certificate_to_json(cert);
    out["dim"] = dim;
    out["condition1"] = rep.condition1;
    out["condition2"] = rep.condition2;
    out["minorant_ok"] = rep.minorant_ok;
    out["majorant_ok"] = rep.majorant_ok;
    out["admissible"] = rep.admissible();
    if (rep.offending_r >= 0.0) out["offending_r"] = rep.offending_r;
    if (!rep.detail.empty()) out["detail"] = rep.detail;

    if (stability_budget > 0) {
        std::uint64_t s = seed.value_or(1);
        StabilityVisitLog log;
        StabilityCertificate sc =
            estimate_stability_constant(pot, dim, stability_budget, s, &log);
        const char* method =
            sc.method == StabilityMethod::analytic_nonnegative ? "analytic_nonnegative"
            : sc.method == StabilityMethod::analytic_hardcore_bound
                ? "analytic_hardcore_bound"
                : "random_search";
        out["stability"] = {{"B", sc.B},
                            {"method", method},
                            {"search_budget", sc.search_budget},
                            {"worst_found", sc.worst_found},
                            {"unstable_suspected", sc.unstable_suspected}};
    }
    std::cout << out.dump(2) << "\n";
    return rep.admissible() ? 0 : 1;
}

int cmd_oracle(const std::string& cfg_path, const std::string& out_path,
               std::optional<std::uint64_t> seed, int rho1_points,
               bool skip_rho2, bool skip_janossy) {
    RunConfig cfg = parse_config(cfg_path);
    OracleParams params;
    params.box = cfg.box;
    params.beta = cfg.beta;
    params.mu = cfg.mu;
    params.potential = cfg.potential;
    params.quad = cfg.quad;
    params.trunc = cfg.trunc;
    params.stability_B = resolve_stability_B(cfg, seed);
    Oracle oracle(params);

    json out;
    out["format_version"] = kFormatVersion;
    out["config"] = cfg.resolved;
    out["stability_b"] = params.stability_B;

    ValueWithBound xi = oracle.grand_partition();
    out["xi"] = xi.value;
    out["xi_error"] = xi.bound;
    out["pressure"] = value_bound_json(oracle.pressure());
    out["mean_n"] = value_bound_json(oracle.mean_particle_number());
    out["mean_energy"] = value_bound_json(oracle.mean_energy());
    out["truncation"] = {{"n_max", oracle.truncation().n_max},
                         {"tail_bound", oracle.truncation().tail_bound}};

    json rho1 = json::array();
    for (int i = 0; i < rho1_points; ++i) {
        double x = -cfg.box.half_width +
                   cfg.box.side() * (i + 0.5) / rho1_points;
        auto v = oracle.correlation({{Point{x, 0.0, 0.0}}});
        rho1.push_back({{"x", x}, {"value", v[0].value}, {"bound", v[0].bound}});
    }
    out["rho1"] = rho1;

    if (!skip_rho2 && cfg.box.dim == 1 &&
        cfg.binning.r_max < cfg.box.half_width) {
        CorrelationEstimate est = oracle.rho2_binned(cfg.binning);
        json grid = json::array();
        for (std::size_t i = 0; i < est.binning.bins; ++i)
            grid.push_back({{"r_lo", est.binning.lo(i)},
                            {"r_mid", est.binning.mid(i)},
                            {"r_hi", est.binning.hi(i)},
                            {"value", est.rho2[i]},
                            {"bound", est.rho2_err[i]}});
        out["rho2_grid"] = grid;
    }

    if (!skip_janossy) {
        JanossyTable table = oracle.janossy_table();
        out["janossy"] = {{"m_max", table.m_max},
                          {"integral", table.integral},
                          {"entropy_integrand", table.entropy_integrand},
                          {"normalization_defect", table.normalization_defect},
                          {"tail_diagnostic", table.tail_diagnostic}};
    }

    atomic_write_text(out_path, out.dump(2) + "\n");
    return 0;
}

json summary_json(const SampleSet& samples, const RunConfig& cfg) {
    json out;
    out["format_version"] = kFormatVersion;
    out["config"] = cfg.resolved;
    out["seed"] = samples.seed;
    out["rng"] = samples.rng_name;
    auto rate = [](std::uint64_t acc, std::uint64_t att) {
        return att ? static_cast<double>(acc) / static_cast<double>(att) : 0.0;
    };
    out["acceptance"] = {
        {"insert", rate(samples.counters.insert_accepts, samples.counters.insert_attempts)},
        {"delete", rate(samples.counters.delete_accepts, samples.counters.delete_attempts)},
        {"displace",
         rate(samples.counters.displace_accepts, samples.counters.displace_attempts)}};
    BlockStats n = samples.n_stats();
    BlockStats e = samples.energy_stats();
    out["mean_n"] = {{"value", n.mean}, {"sigma", n.sigma},
                     {"sigma_defined", n.sigma_defined}, {"blocks", n.blocks}};
    out["mean_energy"] = {{"value", e.mean}, {"sigma", e.sigma},
                          {"sigma_defined", e.sigma_defined}, {"blocks", e.blocks}};
    json tuning = json::array();
    for (const auto& [step, d] : samples.tuning_record)
        tuning.push_back({{"step", step}, {"max_displacement", d}});
    out["tuning"] = {{"record", tuning},
                     {"final_max_displacement", samples.tuned_displacement}};
    out["frames"] = samples.frames.size();
    json warnings = json::array();
    if (samples.ergodicity_warning)
        warnings.push_back("a full block saw no accepted insertions or deletions");
    out["warnings"] = warnings;
    return out;
}

int cmd_simulate(const std::string& cfg_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path, const std::string& summary_path,
                 int workers_flag) {
    RunConfig cfg = parse_config(cfg_path);
    ChainSpec spec = cfg.chain_spec();
    spec.seed = resolve_seed(cfg, seed);
    int workers = workers_flag > 0 ? workers_flag : cfg.workers;
    SampleSet samples = run_replicated(spec, workers);
    if (samples.ergodicity_warning)
        std::cerr << "warning: non-ergodic symptom (a block saw no accepted "
                     "insertions/deletions)\n";
    write_frames_ndjson(out_path, samples, cfg.resolved);
    if (!summary_path.empty())
        atomic_write_text(summary_path, summary_json(samples, cfg).dump(2) + "\n");
    return 0;
}

int cmd_rdf(const std::string& frames_path, std::size_t bins, double rmax,
            const std::string& out_path) {
    LoadedFrames loaded = read_frames_ndjson(frames_path);
    if (loaded.samples.frames.empty())
        throw RefusalError("rdf: no frames in " + frames_path);
    Binning binning{bins, rmax};
    double core = 0.0;
    if (loaded.header && loaded.header->contains("config") &&
        loaded.header->at("config").contains("potential")) {
        PairPotential pot =
            potential_from_json(loaded.header->at("config").at("potential"));
        core = pot.hard_core_radius();
    }
    CorrelationEstimate est =
        pair_correlation_estimate(loaded.samples, loaded.samples.box, binning, core);
    RdfCurve curve = rdf(est);
    write_g_csv(out_path, est, curve);
    return 0;
}

int cmd_thermo(const std::string& cfg_path, const std::string& frames_path,
               bool use_oracle, std::optional<std::uint64_t> seed,
               const std::string& out_path, double defect_tol) {
    RunConfig cfg = parse_config(cfg_path);
    ThermoReport report;
    report.beta = cfg.beta;
    report.mu = cfg.mu;

    json extra;
    if (use_oracle) {
        OracleParams params;
        params.box = cfg.box;
        params.beta = cfg.beta;
        params.mu = cfg.mu;
        params.potential = cfg.potential;
        params.quad = cfg.quad;
        params.trunc = cfg.trunc;
        params.stability_B = resolve_stability_B(cfg, seed);
        Oracle oracle(params);
        ValueWithBound n = oracle.mean_particle_number();
        ValueWithBound h = oracle.mean_energy();
        ValueWithBound p = oracle.pressure();
        JanossyTable table = oracle.janossy_table();
        SpecificEntropy s = specific_entropy(table, cfg.box, defect_tol);
        const double vol = cfg.box.volume();
        report.rho = n.value / vol;
        report.rho_err = n.bound / vol;
        report.energy = h.value / vol;
        report.energy_err = h.bound / vol;
        report.entropy = s.value;
        report.entropy_err = s.truncation;
        report.has_entropy = true;
        report.omega = grand_potential(cfg.beta, cfg.mu, report.rho, report.energy,
                                       report.entropy);
        report.omega_err = std::abs(cfg.mu) * report.rho_err + report.energy_err +
                           report.entropy_err / cfg.beta;
        report.pressure = p.value;
        report.pressure_err = p.bound;
        report.provenance = "oracle";
        extra["normalization_defect"] = s.normalization_defect;
        extra["variational_identity_gap"] = report.pressure - report.omega;
    } else {
        if (frames_path.empty())
            throw ConfigError("thermo: pass --frames or --oracle");
        LoadedFrames loaded = read_frames_ndjson(frames_path);
        const BoxSpec& box = loaded.samples.box;
        DensityEstimate rho = density_estimate(loaded.samples, box);
        FiniteVolumeEnergy efv =
            specific_energy_finite_volume(loaded.samples, cfg.potential, box);
        report.rho = rho.rho;
        report.rho_err = rho.sigma;
        report.energy = efv.value;
        report.energy_err = efv.sigma;
        report.has_entropy = false;
        report.provenance = "sampled";
        CorrelationEstimate est = pair_correlation_estimate(
            loaded.samples, box, cfg.binning, cfg.potential.hard_core_radius());
        SpecificEnergy easy = specific_energy(cfg.potential, est, box.dim);
        extra["energy_from_rho2"] = {{"value", easy.value},
                                     {"tail_bound", easy.tail_bound},
                                     {"quad_bound", easy.quad_bound}};
    }

    json out;
    out["format_version"] = kFormatVersion;
    out["config"] = cfg.resolved;
    out["provenance"] = report.provenance;
    out["rho"] = {{"value", report.rho}, {"uncertainty", report.rho_err}};
    out["energy"] = {{"value", report.energy}, {"uncertainty", report.energy_err}};
    if (report.has_entropy) {
        out["entropy"] = {{"value", report.entropy}, {"uncertainty", report.entropy_err}};
        out["omega"] = {{"value", report.omega}, {"uncertainty", report.omega_err}};
        out["pressure"] = {{"value", report.pressure}, {"uncertainty", report.pressure_err}};
        out["identity_residual"] = report.identity_residual();
    }
    out.update(extra);
    atomic_write_text(out_path, out.dump(2) + "\n");
    return 0;
}

int cmd_invert(const std::string& target_path, const std::string& cfg_path,
               std::optional<std::uint64_t> seed, const std::string& out_path,
               const std::string& history_path, int workers_flag) {
    RunConfig cfg = parse_config(cfg_path);
    GCurveFile target = read_g_csv(target_path);

    SolverConfig solver;
    solver.max_iters = cfg.solver_max_iters;
    solver.alpha = cfg.solver_alpha;
    solver.mask_epsilon = cfg.solver_mask_epsilon;
    solver.tolerance = cfg.solver_tolerance;
    solver.binning = target.binning;
    solver.chain = cfg.chain_spec();
    solver.master_seed = resolve_seed(cfg, seed);
    solver.workers = workers_flag > 0 ? workers_flag : cfg.workers;
    solver.match_density = cfg.solver_match_density;
    solver.density_target = cfg.solver_density_target;

    InvertResult result = invert(target.curve, cfg.beta, cfg.mu, cfg.box, solver);
    write_u_csv(out_path, result.best_state);

    json hist;
    hist["format_version"] = kFormatVersion;
    hist["config"] = cfg.resolved;
    hist["seed"] = solver.master_seed;
    hist["tolerance_used"] = result.tolerance_used;
    hist["converged"] = result.converged;
    hist["stagnated"] = result.stagnated;
    hist["ergodicity_warning"] = result.ergodicity_warning;
    hist["best_iteration"] = result.best_iteration;
    hist["best_residual_inf"] = result.best_res_inf;
    json iters = json::array();
    for (const auto& it : result.history)
        iters.push_back({{"k", it.k},
                         {"res_inf", it.res_inf},
                         {"res_l2", it.res_l2},
                         {"mu_used", it.mu_used},
                         {"rho_measured", it.rho_measured}});
    hist["iterations"] = iters;
    if (!history_path.empty())
        atomic_write_text(history_path, hist.dump(2) + "\n");
    if (result.stagnated)
        std::cerr << "warning: residual stagnated; best iterate returned\n";
    return 0;
}

int cmd_uniqueness(const std::string& u_path, const std::string& v_path,
                   const std::string& cfg_path, std::optional<std::uint64_t> seed,
                   const std::string& out_path, int workers_flag) {
    RunConfig cfg = parse_config(cfg_path);
    PairPotential u = potential_from_json(load_json_file(u_path, "u potential"));
    PairPotential v = potential_from_json(load_json_file(v_path, "v potential"));
    ChainSpec chain = cfg.chain_spec();
    chain.seed = resolve_seed(cfg, seed);
    int workers = workers_flag > 0 ? workers_flag : cfg.workers;

    UniquenessReport rep = uniqueness_experiment(u, v, cfg.beta, cfg.mu, cfg.box,
                                                 chain, cfg.binning, workers);
    json out;
    out["format_version"] = kFormatVersion;
    out["config"] = cfg.resolved;
    out["u"] = potential_to_json(u);
    out["v"] = potential_to_json(v);
    out["max_significance"] = rep.max_significance;
    out["argmax_r"] = rep.argmax_r;
    out["inconclusive"] = rep.inconclusive;
    if (rep.inconclusive)
        out["note"] = "inconclusive - increase sampling (never claims equality)";
    out["ergodicity_warning"] = rep.ergodicity_warning;
    if (rep.cross_check.infinite) {
        out["henderson_cross_check"] = nullptr;
        out["henderson_cross_check_infinite_terms"] = rep.cross_check.infinite_terms;
    } else {
        out["henderson_cross_check"] = rep.cross_check.value;
    }
    json curves = json::array();
    for (std::size_t i = 0; i < rep.r_mid.size(); ++i)
        curves.push_back({{"r", rep.r_mid[i]},
                          {"g_u", rep.g_u[i]},
                          {"g_v", rep.g_v[i]},
                          {"sigma", rep.sigma_combined[i]}});
    out["curves"] = curves;
    atomic_write_text(out_path, out.dump(2) + "\n");
    return rep.inconclusive ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grand-canonical pair-potential toolkit"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "override the config seed")->expected(1);
    int workers = 0;
    app.add_option("--workers", workers, "replica parallelism (1 = reference)");

    // validate
    auto* validate = app.add_subcommand("validate", "check admissibility conditions")->fallthrough();
    std::string v_pot, v_cert;
    int v_dim = 3;
    std::uint64_t v_budget = 0;
    validate->add_option("--potential", v_pot, "potential JSON")->required();
    validate->add_option("--certificate", v_cert, "certificate JSON")->required();
    validate->add_option("--dim", v_dim, "space dimension");
    validate->add_option("--stability-budget", v_budget,
                         "also certify stability with this search budget");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "exact small-system reference")->fallthrough();
    std::string o_cfg, o_out = "oracle.json";
    int o_rho1 = 33;
    bool o_skip_rho2 = false, o_skip_janossy = false;
    oracle_cmd->add_option("--config", o_cfg, "run config JSON")->required();
    oracle_cmd->add_option("--out", o_out, "report path");
    oracle_cmd->add_option("--rho1-points", o_rho1, "density profile grid size");
    oracle_cmd->add_flag("--skip-rho2", o_skip_rho2, "skip the binned rho2 grid");
    oracle_cmd->add_flag("--skip-janossy", o_skip_janossy, "skip the Janossy table");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "grand-canonical Metropolis run")->fallthrough();
    std::string s_cfg, s_out = "frames.ndjson", s_summary;
    simulate->add_option("--config", s_cfg, "run config JSON")->required();
    simulate->add_option("--out", s_out, "frames output (ndjson)");
    simulate->add_option("--summary", s_summary, "summary JSON path");

    // rdf
    auto* rdf_cmd = app.add_subcommand("rdf", "pair correlation / rdf from frames")->fallthrough();
    std::string r_frames, r_out = "g.csv";
    std::size_t r_bins = 200;
    double r_rmax = 4.0;
    rdf_cmd->add_option("--frames", r_frames, "frames ndjson")->required();
    rdf_cmd->add_option("--bins", r_bins, "number of bins");
    rdf_cmd->add_option("--rmax", r_rmax, "histogram range");
    rdf_cmd->add_option("--out", r_out, "g.csv path");

    // thermo
    auto* thermo_cmd = app.add_subcommand("thermo", "thermodynamic functionals")->fallthrough();
    std::string t_cfg, t_frames, t_out = "thermo.json";
    bool t_oracle = false;
    double t_defect = 1.0e-6;
    thermo_cmd->add_option("--config", t_cfg, "run config JSON")->required();
    thermo_cmd->add_option("--frames", t_frames, "sample frames (sampled route)");
    thermo_cmd->add_flag("--oracle", t_oracle, "oracle route (includes S and Omega)");
    thermo_cmd->add_option("--out", t_out, "report path");
    thermo_cmd->add_option("--entropy-defect-tol", t_defect,
                           "Janossy normalization defect tolerance");

    // invert
    auto* invert_cmd = app.add_subcommand("invert", "iterative Boltzmann inversion")->fallthrough();
    std::string i_target, i_cfg, i_out = "u.csv", i_history;
    invert_cmd->add_option("--target", i_target, "target g.csv")->required();
    invert_cmd->add_option("--config", i_cfg, "run config JSON")->required();
    invert_cmd->add_option("--out", i_out, "recovered potential (u.csv)");
    invert_cmd->add_option("--history", i_history, "iteration history JSON");

    // uniqueness
    auto* uniq = app.add_subcommand("uniqueness", "distinct-potential witness")->fallthrough();
    std::string q_u, q_v, q_cfg, q_out = "uniqueness.json";
    uniq->add_option("--u", q_u, "first potential JSON")->required();
    uniq->add_option("--v", q_v, "second potential JSON")->required();
    uniq->add_option("--config", q_cfg, "run config JSON")->required();
    uniq->add_option("--out", q_out, "report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*validate)
            return cmd_validate(v_pot, v_cert, v_dim, v_budget, seed);
        if (*oracle_cmd)
            return cmd_oracle(o_cfg, o_out, seed, o_rho1, o_skip_rho2, o_skip_janossy);
        if (*simulate)
            return cmd_simulate(s_cfg, seed, s_out, s_summary, workers);
        if (*rdf_cmd) return cmd_rdf(r_frames, r_bins, r_rmax, r_out);
        if (*thermo_cmd)
            return cmd_thermo(t_cfg, t_frames, t_oracle, seed, t_out, t_defect);
        if (*invert_cmd)
            return cmd_invert(i_target, i_cfg, seed, i_out, i_history, workers);
        if (*uniq) return cmd_uniqueness(q_u, q_v, q_cfg, seed, q_out, workers);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const RefusalError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
