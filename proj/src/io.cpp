#include "hendinv/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hendinv/errors.hpp"
#include "hendinv/numeric.hpp"

namespace hendinv {

using nlohmann::json;

json potential_to_json(const PairPotential& pot) {
    json j;
    j["kind"] = pot.kind();
    if (const auto* lj = std::get_if<LennardJonesParams>(&pot.params())) {
        j["epsilon"] = lj->epsilon;
        j["sigma"] = lj->sigma;
        j["cutoff"] = pot.cutoff_radius();
    } else if (const auto* hc = std::get_if<HardCoreParams>(&pot.params())) {
        j["core_radius"] = hc->core_radius;
        json knots = json::array();
        for (std::size_t i = 0; i < hc->tail.r.size(); ++i)
            knots.push_back({hc->tail.r[i], hc->tail.u[i]});
        j["tail"] = {{"knots", knots}};
        j["cutoff"] = pot.cutoff_radius();
    } else {
        const auto& tb = std::get<TabulatedParams>(pot.params());
        json knots = json::array();
        for (std::size_t i = 0; i < tb.knots.r.size(); ++i)
            knots.push_back({tb.knots.r[i], tb.knots.u[i]});
        j["knots"] = knots;
        j["cutoff"] = pot.cutoff_radius();
        j["huge_threshold"] = tb.huge_threshold;
    }
    return j;
}

namespace {

TabulatedCurve knots_from_json(const json& arr, const char* where) {
    if (!arr.is_array()) throw ConfigError(std::string(where) + ": knots must be an array");
    TabulatedCurve c;
    for (const auto& k : arr) {
        if (!k.is_array() || k.size() != 2)
            throw ConfigError(std::string(where) + ": each knot must be [r, u]");
        c.r.push_back(k[0].get<double>());
        c.u.push_back(k[1].get<double>());
    }
    return c;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) known = true;
        if (!known) {
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
            std::string msg = std::string(where) + ": unknown key '" + it.key() + "'";
            if (!best.empty()) msg += " (did you mean '" + best + "'?)";
            throw ConfigError(msg);
        }
    }
}

} // namespace

PairPotential potential_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("potential: object with a 'kind' field required");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "lennard_jones") {
        reject_unknown_keys(j, {"kind", "epsilon", "sigma", "cutoff"}, "potential");
        double epsilon = j.value("epsilon", 1.0);
        double sigma = j.value("sigma", 1.0);
        double cutoff = j.value("cutoff", 3.5 * sigma);
        return PairPotential::lennard_jones(epsilon, sigma, cutoff);
    }
    if (kind == "hard_core") {
        reject_unknown_keys(j, {"kind", "core_radius", "tail", "cutoff"}, "potential");
        if (!j.contains("core_radius"))
            throw ConfigError("potential: hard_core requires core_radius");
        TabulatedCurve tail;
        if (j.contains("tail")) {
            reject_unknown_keys(j.at("tail"), {"knots"}, "potential.tail");
            tail = knots_from_json(j.at("tail").at("knots"), "potential.tail");
        }
        std::optional<double> cutoff;
        if (j.contains("cutoff")) cutoff = j.at("cutoff").get<double>();
        return PairPotential::hard_core(j.at("core_radius").get<double>(),
                                        std::move(tail), cutoff);
    }
    if (kind == "tabulated") {
        reject_unknown_keys(j, {"kind", "knots", "cutoff", "huge_threshold"},
                            "potential");
        if (!j.contains("knots")) throw ConfigError("potential: tabulated requires knots");
        TabulatedCurve knots = knots_from_json(j.at("knots"), "potential");
        std::optional<double> cutoff;
        if (j.contains("cutoff")) cutoff = j.at("cutoff").get<double>();
        return PairPotential::tabulated(std::move(knots), cutoff,
                                        j.value("huge_threshold", 1.0e6));
    }
    throw ConfigError("potential: unknown kind '" + kind +
                      "' (expected lennard_jones, hard_core or tabulated)");
}

json certificate_to_json(const AdmissibilityCertificate& cert) {
    return {{"p", cert.p}, {"q", cert.q}, {"r0", cert.r0},
            {"c1", cert.c1}, {"c2", cert.c2}};
}

AdmissibilityCertificate certificate_from_json(const json& j) {
    reject_unknown_keys(j, {"p", "q", "r0", "c1", "c2"}, "certificate");
    AdmissibilityCertificate cert;
    cert.p = j.value("p", 0.0);
    cert.q = j.value("q", 0.0);
    cert.r0 = j.value("r0", 1.0);
    cert.c1 = j.value("c1", 1.0);
    cert.c2 = j.value("c2", 1.0);
    return cert;
}

json box_to_json(const BoxSpec& box) {
    return {{"dim", box.dim},
            {"ell", box.half_width},
            {"boundary", box.boundary == Boundary::free ? "free" : "periodic"}};
}

BoxSpec box_from_json(const json& j) {
    reject_unknown_keys(j, {"dim", "ell", "boundary"}, "box");
    BoxSpec box;
    box.dim = j.value("dim", 1);
    box.half_width = j.value("ell", 1.0);
    std::string b = j.value("boundary", "free");
    if (b == "free")
        box.boundary = Boundary::free;
    else if (b == "periodic")
        box.boundary = Boundary::periodic;
    else
        throw ConfigError("box.boundary: expected 'free' or 'periodic'");
    box.validate();
    return box;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw ConfigError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw ConfigError("atomic rename failed: " + path);
    }
}

void write_frames_ndjson(const std::string& path, const SampleSet& samples,
                         const json& resolved_config) {
    std::ostringstream out;
    json header;
    header["format_version"] = kFormatVersion;
    header["config"] = resolved_config;
    header["box"] = box_to_json(samples.box);
    header["beta"] = samples.beta;
    header["mu"] = samples.mu;
    header["seed"] = samples.seed;
    header["rng"] = samples.rng_name;
    out << header.dump() << "\n";
    for (const auto& frame : samples.frames) {
        json line;
        line["step"] = frame.step;
        json pos = json::array();
        for (const auto& p : frame.positions) {
            json coords = json::array();
            for (int k = 0; k < samples.box.dim; ++k)
                coords.push_back(p[static_cast<std::size_t>(k)]);
            pos.push_back(coords);
        }
        line["positions"] = pos;
        out << line.dump() << "\n";
    }
    atomic_write_text(path, out.str());
}

LoadedFrames read_frames_ndjson(const std::string& path,
                                std::optional<BoxSpec> box) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open frames file: " + path);
    LoadedFrames out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ConfigError("frames: invalid JSON line in " + path);
        if (first) {
            first = false;
            if (j.contains("format_version")) {
                out.header = j;
                out.samples.box = box_from_json(j.at("box"));
                out.samples.beta = j.value("beta", 1.0);
                out.samples.mu = j.value("mu", 0.0);
                out.samples.seed = j.value("seed", 0ULL);
                out.samples.rng_name = j.value("rng", "");
                continue;
            }
            if (!box)
                throw ConfigError("frames: headerless stream needs an explicit box");
            out.samples.box = *box;
        }
        Frame frame;
        frame.step = j.value("step", 0ULL);
        const auto& pos = j.at("positions");
        for (const auto& coords : pos) {
            Point p{0.0, 0.0, 0.0};
            std::size_t d = std::min<std::size_t>(coords.size(), 3);
            for (std::size_t k = 0; k < d; ++k) p[k] = coords[k].get<double>();
            frame.positions.push_back(p);
        }
        out.samples.frames.push_back(std::move(frame));
    }
    if (box) out.samples.box = *box;
    return out;
}

void write_g_csv(const std::string& path, const CorrelationEstimate& est,
                 const RdfCurve& curve) {
    std::ostringstream out;
    out.precision(17);
    out << "r_lo,r_mid,r_hi,rho2,rho2_err,g,g_err\n";
    for (std::size_t i = 0; i < est.binning.bins; ++i) {
        out << est.binning.lo(i) << ',' << est.binning.mid(i) << ','
            << est.binning.hi(i) << ',' << est.rho2[i] << ',' << est.rho2_err[i]
            << ',' << curve.g[i] << ',' << curve.g_err[i] << "\n";
    }
    atomic_write_text(path, out.str());
}

GCurveFile read_g_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open g curve: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("g curve: empty file " + path);
    GCurveFile out;
    double last_hi = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<double> v;
        while (std::getline(ss, field, ',')) v.push_back(std::stod(field));
        if (v.size() != 7)
            throw ConfigError("g curve: expected 7 columns in " + path);
        out.curve.r_mid.push_back(v[1]);
        out.rho2.push_back(v[3]);
        out.rho2_err.push_back(v[4]);
        out.curve.g.push_back(v[5]);
        out.curve.g_err.push_back(v[6]);
        last_hi = v[2];
    }
    if (out.curve.g.empty()) throw ConfigError("g curve: no rows in " + path);
    out.binning.bins = out.curve.g.size();
    out.binning.r_max = last_hi;
    return out;
}

void write_u_csv(const std::string& path, const IbiState& state) {
    std::ostringstream out;
    out.precision(17);
    out << "r,u,frozen_flag\n";
    const std::size_t fa = state.first_active();
    for (std::size_t i = 0; i < state.binning.bins; ++i) {
        out << state.binning.mid(i) << ',';
        if (state.frozen[i] && i < fa)
            out << "inf";
        else
            out << state.u[i];
        out << ',' << (state.frozen[i] ? 1 : 0) << "\n";
    }
    atomic_write_text(path, out.str());
}

} // namespace hendinv
