#include "flq/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flq/errors.hpp"

namespace flq::io {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json meta_block() {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  return json{{"generator", "floquet"}, {"version", "0.1.0"}, {"generated_unix", secs}};
}

json sampling_to_json(const group::SamplingFunction& f) {
  json j;
  j["periods"] = f.chain().periods();
  j["level"] = f.level();
  j["values"] = f.values();
  return j;
}

json sampling_to_json(const precise::PreciseSampling& f, unsigned precision_bits) {
  json j;
  j["periods"] = f.chain.periods();
  j["level"] = f.level;
  j["precision_bits"] = precision_bits;
  json vals = json::array();
  unsigned digits = precise::digits10_for_bits(precision_bits);
  for (const auto& v : f.values) vals.push_back(precise::to_decimal(v, digits));
  j["values"] = vals;
  return j;
}

bool sampling_json_is_precise(const json& j) { return j.contains("precision_bits"); }

group::SamplingFunction sampling_from_json(const json& j) {
  try {
    auto chain = group::make_chain(j.at("periods").get<std::vector<std::int64_t>>());
    int level = j.at("level").get<int>();
    std::vector<double> values;
    for (const auto& v : j.at("values")) {
      if (v.is_string())
        values.push_back(std::stod(v.get<std::string>()));
      else
        values.push_back(v.get<double>());
    }
    return group::SamplingFunction(std::move(chain), level, std::move(values));
  } catch (const json::exception& e) {
    throw validation_error(std::string("bad sampling-function JSON: ") + e.what());
  }
}

precise::PreciseSampling precise_sampling_from_json(const json& j, unsigned precision_bits) {
  try {
    unsigned bits = j.value("precision_bits", precision_bits);
    precise::PrecisionGuard guard(std::max(bits, precision_bits));
    auto chain = group::make_chain(j.at("periods").get<std::vector<std::int64_t>>());
    int level = j.at("level").get<int>();
    precise::PreciseSampling f{std::move(chain), level, {}};
    for (const auto& v : j.at("values")) {
      if (v.is_string())
        f.values.push_back(precise::from_decimal(v.get<std::string>()));
      else
        f.values.emplace_back(v.get<double>());
    }
    if (f.values.size() != static_cast<std::size_t>(f.period()))
      throw validation_error("precise sampling value count does not match the level period");
    return f;
  } catch (const json::exception& e) {
    throw validation_error(std::string("bad sampling-function JSON: ") + e.what());
  }
}

json bands_to_json(const spectrum::BandStructure& bs) {
  json j;
  j["type"] = "bands";
  j["period"] = bs.period;
  json bands = json::array();
  for (const auto& b : bs.bands) bands.push_back({b.lo, b.hi});
  j["bands"] = bands;
  json gaps = json::array();
  for (const auto& g : bs.gaps)
    gaps.push_back({{"lo", g.lo}, {"hi", g.hi}, {"length", g.length()}, {"closed", g.closed}});
  j["gaps"] = gaps;
  if (std::isfinite(bs.min_gap))
    j["min_gap"] = bs.min_gap;
  else
    j["min_gap"] = nullptr;
  j["total_measure"] = bs.total_measure;
  j["discriminant"] = bs.delta.coeffs();
  j["tol_gap"] = bs.tol_gap;
  return j;
}

json gap_certificate_to_json(const gaps::GapCertificate& cert) {
  json j;
  j["type"] = "gap_certificate";
  j["period"] = cert.period;
  j["eps"] = cert.eps;
  j["M"] = cert.M;
  j["t"] = cert.t;
  j["perturbation"] = cert.perturbation;
  j["gap_lengths"] = cert.gap_lengths;
  json rejected = json::array();
  for (const auto& r : cert.rejected)
    rejected.push_back({{"t", r.t},
                        {"witness_energy", r.witness_energy},
                        {"witness_class", spectrum::trace_class_name(r.witness_class)},
                        {"gap_length", r.gap_length}});
  j["rejected"] = rejected;
  j["tol_gap"] = cert.tol_gap;
  j["precision_bits"] = cert.precision_bits;
  return j;
}

gaps::GapCertificate gap_certificate_from_json(const json& j) {
  try {
    gaps::GapCertificate cert;
    cert.period = j.at("period").get<std::int64_t>();
    cert.eps = j.at("eps").get<double>();
    cert.M = j.at("M").get<std::int64_t>();
    cert.t = j.at("t").get<int>();
    cert.perturbation = j.at("perturbation").get<double>();
    cert.gap_lengths = j.at("gap_lengths").get<std::vector<double>>();
    cert.tol_gap = j.at("tol_gap").get<double>();
    cert.precision_bits = j.at("precision_bits").get<unsigned>();
    return cert;
  } catch (const json::exception& e) {
    throw validation_error(std::string("bad gap-certificate JSON: ") + e.what());
  }
}

json construction_log(const builders::ConstructionState& st) {
  json j;
  j["type"] = st.ac_mode ? "ac" : "cantor";
  j["chain"] = st.chain.periods();
  j["eps"] = st.eps;
  j["base"] = sampling_to_json(st.base);
  if (!st.f_stage.empty()) j["final"] = sampling_to_json(st.f_stage.back());
  json stages = json::array();
  for (const auto& rec : st.stages) {
    json s;
    s["k"] = rec.k;
    s["level"] = rec.level;
    s["period"] = rec.period;
    s["s_norm"] = rec.s_norm;
    s["eps_budget"] = rec.eps_budget;
    if (std::isfinite(rec.beta_budget))
      s["beta_budget"] = rec.beta_budget;
    else
      s["beta_budget"] = nullptr;
    s["t"] = rec.cert.t;
    s["M"] = rec.cert.M;
    s["halvings"] = rec.halvings;
    if (std::isnan(rec.density_distance))
      s["density_distance"] = nullptr;
    else
      s["density_distance"] = rec.density_distance;
    if (std::isfinite(rec.bands.min_gap)) s["min_gap"] = rec.bands.min_gap;
    json bands = json::array();
    for (const auto& b : rec.bands.bands) bands.push_back({b.lo, b.hi});
    s["bands"] = bands;
    json gaps = json::array();
    for (const auto& g : rec.bands.gaps)
      gaps.push_back(
          {{"lo", g.lo}, {"hi", g.hi}, {"length", g.length()}, {"closed", g.closed}});
    s["gaps"] = gaps;
    s["certificate"] = gap_certificate_to_json(rec.cert);
    stages.push_back(std::move(s));
  }
  j["stages"] = stages;
  if (st.ac_mode) {
    j["u"] = finite_vector_to_spec(st.u);
    j["t_exponent"] = st.t_exp;
    j["q_constant"] = st.q_constant;
    j["holder_exponent"] = st.holder_exponent;
  }
  return j;
}

std::vector<builders::StageAuditEntry> audit_entries_from_log(const json& log) {
  std::vector<builders::StageAuditEntry> entries;
  try {
    for (const auto& s : log.at("stages")) {
      builders::StageAuditEntry e;
      e.k = s.at("k").get<int>();
      e.s_norm = s.at("s_norm").get<double>();
      for (const auto& g : s.at("gaps")) {
        e.gap_lengths.push_back(g.at("length").get<double>());
        e.any_closed = e.any_closed || g.at("closed").get<bool>();
      }
      if (s.contains("density_distance") && !s.at("density_distance").is_null())
        e.density_distance = s.at("density_distance").get<double>();
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw validation_error(std::string("bad construction log JSON: ") + e.what());
  }
  return entries;
}

json gordon_log(const builders::GordonBuild& build, const group::GroupChain& chain) {
  json j;
  j["type"] = "gordon";
  j["chain"] = chain.periods();
  j["precision_bits"] = build.certificate.precision_bits;
  j["pass"] = build.certificate.pass;
  j["window"] = {build.certificate.window_lo, build.certificate.window_hi};
  json stages = json::array();
  for (const auto& s : build.certificate.stages) {
    stages.push_back({{"k", s.k},
                      {"j", s.j},
                      {"q", s.q},
                      {"budget", s.budget},
                      {"s_norm", s.s_norm},
                      {"approx_error", s.approx_error},
                      {"deviation", s.deviation},
                      {"threshold", s.threshold},
                      {"precision_bits", s.precision_bits},
                      {"budget_ok", s.budget_ok},
                      {"gordon_ok", s.gordon_ok}});
  }
  j["stages"] = stages;
  j["final"] = sampling_to_json(build.final_f, build.certificate.precision_bits);
  json approx = json::array();
  for (const auto& f : build.approximants)
    approx.push_back(sampling_to_json(f, build.certificate.precision_bits));
  j["approximants"] = approx;
  return j;
}

std::string potential_csv(const group::Potential& v, std::int64_t n0, std::int64_t n1) {
  std::ostringstream out;
  out << "n,V\n";
  for (std::int64_t n = n0; n < n1; ++n) out << n << "," << format_double(v.at(n)) << "\n";
  return out.str();
}

std::string window_csv(const std::vector<precise::BigReal>& window, std::int64_t n0,
                       unsigned digits10) {
  std::ostringstream out;
  out << "n,V\n";
  for (std::size_t i = 0; i < window.size(); ++i)
    out << (n0 + static_cast<std::int64_t>(i)) << ","
        << precise::to_decimal(window[i], digits10) << "\n";
  return out.str();
}

std::string density_csv(const transform::DensityProfile& profile) {
  std::ostringstream out;
  out << "E,k,g\n";
  for (const auto& block : profile.bands)
    for (const auto& row : block.rows)
      out << format_double(row.energy) << "," << format_double(row.k) << ","
          << format_double(row.g) << "\n";
  return out.str();
}

std::pair<std::vector<precise::BigReal>, std::int64_t> window_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<precise::BigReal> values;
  std::int64_t n0 = 0;
  bool first_row = true;
  std::int64_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("n,", 0) == 0) continue;  // header
    auto comma = line.find(',');
    if (comma == std::string::npos) throw validation_error("potential CSV row missing comma");
    std::int64_t n = std::stoll(line.substr(0, comma));
    if (first_row) {
      n0 = n;
      expected = n;
      first_row = false;
    }
    if (n != expected) throw validation_error("potential CSV rows must be consecutive in n");
    ++expected;
    values.push_back(precise::from_decimal(line.substr(comma + 1)));
  }
  if (values.empty()) throw validation_error("potential CSV has no rows");
  return {std::move(values), n0};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open '" + path + "' for writing");
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::string& path, json j, const MetaOptions& meta) {
  if (meta.enabled) j["meta"] = meta_block();
  write_text(path, j.dump(2) + "\n");
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw validation_error("cannot parse JSON from '" + path + "': " + e.what());
  }
}

std::string finite_vector_to_spec(const transform::FiniteVector& u) {
  std::ostringstream out;
  for (std::size_t i = 0; i < u.offsets().size(); ++i) {
    if (i) out << ",";
    out << u.offsets()[i] << ":" << format_double(u.values()[i]);
  }
  return out.str();
}

}  // namespace flq::io
