#ifndef HENDINV_IO_HPP
#define HENDINV_IO_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "hendinv/estimators.hpp"
#include "hendinv/gcmc.hpp"
#include "hendinv/inverse.hpp"
#include "hendinv/potentials.hpp"

namespace hendinv {

inline constexpr const char* kFormatVersion = "1";

nlohmann::json potential_to_json(const PairPotential& pot);
PairPotential potential_from_json(const nlohmann::json& j);

nlohmann::json certificate_to_json(const AdmissibilityCertificate& cert);
AdmissibilityCertificate certificate_from_json(const nlohmann::json& j);

nlohmann::json box_to_json(const BoxSpec& box);
BoxSpec box_from_json(const nlohmann::json& j);

// Write-to-temp plus atomic rename; no partial outputs on failure.
void atomic_write_text(const std::string& path, const std::string& content);

// Newline-delimited JSON frames with a self-describing header line.
void write_frames_ndjson(const std::string& path, const SampleSet& samples,
                         const nlohmann::json& resolved_config);

struct LoadedFrames {
    SampleSet samples;
    std::optional<nlohmann::json> header;
};

// Reads frames of any dimension d in {1,2,3}. A box must be present either
// in the header or supplied by the caller.
LoadedFrames read_frames_ndjson(const std::string& path,
                                std::optional<BoxSpec> box = std::nullopt);

// g.csv columns: r_lo,r_mid,r_hi,rho2,rho2_err,g,g_err
void write_g_csv(const std::string& path, const CorrelationEstimate& est,
                 const RdfCurve& curve);

struct GCurveFile {
    Binning binning;
    RdfCurve curve;
    std::vector<double> rho2, rho2_err;
};
GCurveFile read_g_csv(const std::string& path);

// u.csv columns: r,u,frozen_flag ("inf" inside the masked hard-core prefix).
void write_u_csv(const std::string& path, const IbiState& state);

} // namespace hendinv

#endif
