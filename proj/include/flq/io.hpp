#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "flq/builders.hpp"
#include "flq/gaps.hpp"
#include "flq/group.hpp"
#include "flq/spectrum.hpp"
#include "flq/transform.hpp"

namespace flq::io {

using nlohmann::json;

struct MetaOptions {
  bool enabled = true;  // --no-meta turns the (wall-clock) meta block off
};

json meta_block();

// --- sampling functions -----------------------------------------------
// { "periods": [2,4,8], "level": 2, "values": [ ... ] }; extended-precision
// files carry "precision_bits" and decimal strings in "values".
json sampling_to_json(const group::SamplingFunction& f);
json sampling_to_json(const precise::PreciseSampling& f, unsigned precision_bits);
group::SamplingFunction sampling_from_json(const json& j);
precise::PreciseSampling precise_sampling_from_json(const json& j, unsigned precision_bits);
bool sampling_json_is_precise(const json& j);

// --- band structures ----------------------------------------------------
json bands_to_json(const spectrum::BandStructure& bs);

// --- gap certificates ----------------------------------------------------
json gap_certificate_to_json(const gaps::GapCertificate& cert);
gaps::GapCertificate gap_certificate_from_json(const json& j);

// --- construction logs ----------------------------------------------------
json construction_log(const builders::ConstructionState& st);
std::vector<builders::StageAuditEntry> audit_entries_from_log(const json& log);
json gordon_log(const builders::GordonBuild& build, const group::GroupChain& chain);

// --- CSV ----------------------------------------------------------------
std::string potential_csv(const group::Potential& v, std::int64_t n0, std::int64_t n1);
std::string window_csv(const std::vector<precise::BigReal>& window, std::int64_t n0,
                       unsigned digits10);
std::string density_csv(const transform::DensityProfile& profile);

// Potential window from CSV with columns n,V; values parsed at the current
// working precision.
std::pair<std::vector<precise::BigReal>, std::int64_t> window_from_csv(const std::string& text);

// --- files ----------------------------------------------------------------
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_json(const std::string& path, json j, const MetaOptions& meta = {});
json read_json(const std::string& path);

// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

std::string finite_vector_to_spec(const transform::FiniteVector& u);

}  // namespace flq::io
