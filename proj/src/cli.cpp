#include "flq/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "flq/builders.hpp"
#include "flq/errors.hpp"
#include "flq/gaps.hpp"
#include "flq/io.hpp"
#include "flq/precise.hpp"
#include "flq/transform.hpp"

namespace flq::cli {

namespace {

struct Common {
  bool no_meta = false;
  unsigned precision_bits = 0;  // 0: auto; FLOQUET_PRECISION_BITS overrides the default
  double tol_gap = 1e-12;
};

group::GroupElement omega_element(const group::GroupChain& chain, std::int64_t r) {
  std::vector<std::int64_t> residues;
  for (int k = 1; k <= chain.depth(); ++k) residues.push_back(r % chain.period(k));
  return group::make_element(chain, std::move(residues));
}

group::Potential load_potential(const std::string& path, std::int64_t omega) {
  auto f = io::sampling_from_json(io::read_json(path));
  return group::sample_potential(f, omega_element(f.chain(), omega),
                                 group::adding_machine(f.chain()));
}

io::MetaOptions meta_opts(const Common& c) { return io::MetaOptions{!c.no_meta}; }

void emit_json(const std::optional<std::string>& out, io::json j, const Common& c) {
  if (out) {
    io::write_json(*out, std::move(j), meta_opts(c));
  } else {
    if (!c.no_meta) j["meta"] = io::meta_block();
    std::cout << j.dump(2) << "\n";
  }
}

const CLI::Validator kOpenUnitExponent(
    [](std::string& s) -> std::string {
      try {
        double t = std::stod(s);
        if (t > 1.0 && t < 2.0) return {};
      } catch (const std::exception&) {
      }
      return "t must be in (1,2)";
    },
    "T_IN_(1,2)");

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoll(item));
    } catch (const std::exception&) {
      throw validation_error("'" + item + "' is not an integer");
    }
  }
  return out;
}

int dispatch(CLI::App& app, const Common& common, int parsed_exit);

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{"Spectra, spectral densities, and limit-periodic constructions for 1-d "
               "discrete Schrodinger operators"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Common common;
  if (const char* env = std::getenv("FLOQUET_PRECISION_BITS"))
    common.precision_bits = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  app.add_flag("--no-meta", common.no_meta, "omit the meta block from JSON outputs");
  app.add_option("--precision-bits", common.precision_bits,
                 "extended-precision mantissa bits (0 = auto)");
  app.add_option("--tol-gap", common.tol_gap, "gap-closure tolerance")->check(CLI::PositiveNumber);

  // -- bands ---------------------------------------------------------------
  auto* bands = app.add_subcommand("bands", "band/gap structure of a periodic potential");
  std::string bands_in;
  std::int64_t bands_omega = 0;
  std::optional<std::string> bands_out, bands_pot;
  bands->add_option("-i,--input", bands_in, "sampling-function JSON")->required();
  bands->add_option("--omega", bands_omega, "hull element (orbit index)");
  bands->add_option("-o,--out", bands_out, "output JSON path");
  bands->add_option("--potential-out", bands_pot, "also export V as CSV (n, V over one period)");

  // -- density ---------------------------------------------------------------
  auto* density = app.add_subcommand("density", "spectral-measure density g_{V,u} as CSV");
  std::string density_in, density_u = "0:1";
  std::int64_t density_omega = 0;
  int density_grid = 200;
  std::optional<double> density_t;
  std::optional<std::string> density_out;
  density->add_option("-i,--input", density_in, "sampling-function JSON")->required();
  density->add_option("--omega", density_omega, "hull element (orbit index)");
  density->add_option("--u", density_u, "finite vector, offset:value[,offset:value...]");
  density->add_option("--grid", density_grid, "sample points per band")->check(CLI::PositiveNumber);
  density->add_option("--t", density_t, "also print the L^t norm of g, t in (1,2)")
      ->check(kOpenUnitExponent);
  density->add_option("-o,--out", density_out, "output CSV path");

  // -- mass ---------------------------------------------------------------
  auto* mass = app.add_subcommand("mass", "total spectral mass of (V, u); equals ||u||^2");
  std::string mass_in, mass_u = "0:1";
  std::int64_t mass_omega = 0;
  mass->add_option("-i,--input", mass_in, "sampling-function JSON")->required();
  mass->add_option("--omega", mass_omega, "hull element (orbit index)");
  mass->add_option("--u", mass_u, "finite vector spec");

  // -- ltnorm ---------------------------------------------------------------
  auto* ltnorm = app.add_subcommand("ltnorm", "L^t functionals of dk/dE and of densities");
  std::string lt_in, lt_u;
  std::optional<std::string> lt_in2;
  double lt_t = 1.5;
  std::int64_t lt_omega = 0;
  ltnorm->add_option("-i,--input", lt_in, "sampling-function JSON")->required();
  ltnorm->add_option("--input2", lt_in2, "second potential for the L^t density distance");
  ltnorm->add_option("--u", lt_u, "finite vector spec (enables density norms)");
  ltnorm->add_option("--t", lt_t, "exponent in (1,2)")->required()->check(kOpenUnitExponent);
  ltnorm->add_option("--omega", lt_omega, "hull element (orbit index)");

  // -- open-gaps ---------------------------------------------------------------
  auto* og = app.add_subcommand("open-gaps", "one-site perturbation opening all p-1 gaps");
  std::string og_in;
  double og_eps = 0.0;
  std::optional<std::string> og_out, og_cert;
  og->add_option("-i,--input", og_in, "sampling-function JSON")->required();
  og->add_option("--eps", og_eps, "perturbation budget")->required()->check(CLI::PositiveNumber);
  og->add_option("-o,--out", og_out, "perturbed sampling-function JSON path");
  og->add_option("--cert", og_cert, "certificate JSON path");

  // -- build-cantor ---------------------------------------------------------------
  auto* bc = app.add_subcommand("build-cantor", "staged all-gaps-open construction");
  std::string bc_in;
  double bc_eps = 0.0;
  int bc_stages = 0;
  std::optional<std::string> bc_out, bc_final;
  bc->add_option("-i,--input", bc_in, "seed sampling-function JSON")->required();
  bc->add_option("--eps", bc_eps, "total budget")->required()->check(CLI::PositiveNumber);
  bc->add_option("--stages", bc_stages, "refinement stages K")->required()
      ->check(CLI::NonNegativeNumber);
  bc->add_option("-o,--out", bc_out, "construction log JSON path");
  bc->add_option("--final", bc_final, "final sampling-function JSON path");

  // -- build-ac ---------------------------------------------------------------
  auto* ba = app.add_subcommand("build-ac", "Cantor construction with L^t density control");
  std::string ba_in, ba_u = "0:1";
  double ba_eps = 0.0, ba_t = 1.5;
  int ba_stages = 0;
  std::optional<std::string> ba_out, ba_final;
  ba->add_option("-i,--input", ba_in, "seed sampling-function JSON")->required();
  ba->add_option("--eps", ba_eps, "total budget")->required()->check(CLI::PositiveNumber);
  ba->add_option("--u", ba_u, "finite vector spec");
  ba->add_option("--t", ba_t, "exponent in (1,2)")->required()->check(kOpenUnitExponent);
  ba->add_option("--stages", ba_stages, "refinement stages K")->required()
      ->check(CLI::NonNegativeNumber);
  ba->add_option("-o,--out", ba_out, "construction log JSON path");
  ba->add_option("--final", ba_final, "final sampling-function JSON path");

  // -- build-gordon ---------------------------------------------------------------
  auto* bg = app.add_subcommand("build-gordon", "Gordon potential with certified near-periods");
  std::string bg_in;
  int bg_stages = 0;
  std::optional<std::string> bg_out, bg_window;
  bg->add_option("-i,--input", bg_in, "seed sampling-function JSON (level 1)")->required();
  bg->add_option("--stages", bg_stages, "stages K")->required()->check(CLI::PositiveNumber);
  bg->add_option("-o,--out", bg_out, "Gordon log JSON path");
  bg->add_option("--window-out", bg_window,
                 "potential window CSV over [1-q_K, 2 q_K], decimal strings");

  // -- check-gordon ---------------------------------------------------------------
  auto* cg = app.add_subcommand("check-gordon", "verify the Gordon condition for a window");
  std::string cg_in, cg_qs;
  cg->add_option("-i,--input", cg_in,
                 "potential window CSV (n,V) or sampling-function JSON")
      ->required();
  cg->add_option("--qs", cg_qs, "near-periods q_1,q_2,...")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bands->parsed()) {
      group::Potential v = load_potential(bands_in, bands_omega);
      auto bs = spectrum::band_structure(v, {common.tol_gap});
      emit_json(bands_out, io::bands_to_json(bs), common);
      if (bands_pot) io::write_text(*bands_pot, io::potential_csv(v, 0, v.period));
    } else if (density->parsed()) {
      group::Potential v = load_potential(density_in, density_omega);
      auto u = transform::FiniteVector::parse(density_u);
      auto profile = transform::sample_density_profile(v, u, density_grid);
      std::string csv = io::density_csv(profile);
      // summaries go to stderr when the CSV occupies stdout
      FILE* info = density_out ? stdout : stderr;
      if (density_out)
        io::write_text(*density_out, csv);
      else
        std::cout << csv;
      std::fprintf(info, "mass %.9f\n", profile.total_mass);
      if (density_t) {
        double lt = transform::lt_norm_density(v, u, *density_t);
        std::fprintf(info, "lt_density %.12g\n", lt);
      }
    } else if (mass->parsed()) {
      group::Potential v = load_potential(mass_in, mass_omega);
      auto u = transform::FiniteVector::parse(mass_u);
      std::printf("%.6f\n", transform::spectral_mass(v, u));
    } else if (ltnorm->parsed()) {
      group::Potential v = load_potential(lt_in, lt_omega);
      std::printf("lt_dkdE %.12g\n", transform::lt_norm_dkdE(v, lt_t));
      if (!lt_u.empty()) {
        auto u = transform::FiniteVector::parse(lt_u);
        std::printf("lt_density %.12g\n", transform::lt_norm_density(v, u, lt_t));
        if (lt_in2) {
          group::Potential v2 = load_potential(*lt_in2, lt_omega);
          std::printf("lt_distance %.12g\n", transform::lt_distance(v, v2, u, lt_t));
        }
      }
    } else if (og->parsed()) {
      auto f = io::sampling_from_json(io::read_json(og_in));
      gaps::GapOptions gopts;
      gopts.tol_gap = common.tol_gap;
      auto [f_tilde, cert] = gaps::open_all_gaps(f, og_eps, gopts);
      if (og_out) io::write_json(*og_out, io::sampling_to_json(f_tilde), meta_opts(common));
      if (og_cert) io::write_json(*og_cert, io::gap_certificate_to_json(cert), meta_opts(common));
      std::printf("accepted t=%d M=%lld perturbation %.12g\n", cert.t,
                  static_cast<long long>(cert.M), cert.perturbation);
    } else if (bc->parsed()) {
      auto f0 = io::sampling_from_json(io::read_json(bc_in));
      builders::BuilderOptions opts;
      opts.gap.tol_gap = common.tol_gap;
      auto st = builders::build_cantor(f0, bc_eps, bc_stages, opts);
      auto log = io::construction_log(st);
      auto persistence = builders::gap_persistence_check(st);
      auto auditing = builders::audit(st);
      log["persistence_pass"] = persistence.pass;
      log["audit_pass"] = auditing.pass;
      emit_json(bc_out, std::move(log), common);
      if (bc_final)
        io::write_json(*bc_final, io::sampling_to_json(st.f_stage.back()), meta_opts(common));
    } else if (ba->parsed()) {
      auto f0 = io::sampling_from_json(io::read_json(ba_in));
      auto u = transform::FiniteVector::parse(ba_u);
      builders::BuilderOptions opts;
      opts.gap.tol_gap = common.tol_gap;
      auto st = builders::build_ac(f0, ba_eps, u, ba_t, ba_stages, opts);
      auto log = io::construction_log(st);
      log["persistence_pass"] = builders::gap_persistence_check(st).pass;
      log["audit_pass"] = builders::audit(st).pass;
      emit_json(ba_out, std::move(log), common);
      if (ba_final)
        io::write_json(*ba_final, io::sampling_to_json(st.f_stage.back()), meta_opts(common));
    } else if (bg->parsed()) {
      auto f0 = io::sampling_from_json(io::read_json(bg_in));
      auto build = builders::build_gordon(f0.chain(), bg_stages, f0, common.precision_bits);
      emit_json(bg_out, io::gordon_log(build, f0.chain()), common);
      if (bg_window) {
        precise::PrecisionGuard guard(build.certificate.precision_bits);
        auto window = precise::sample_window(build.final_f, build.certificate.window_lo,
                                             build.certificate.window_hi);
        io::write_text(*bg_window,
                       io::window_csv(window, build.certificate.window_lo,
                                      precise::digits10_for_bits(
                                          build.certificate.precision_bits)));
      }
      std::printf("%s (precision %u bits)\n", build.certificate.pass ? "PASS" : "FAIL",
                  build.certificate.precision_bits);
    } else if (cg->parsed()) {
      auto qs = parse_int_list(cg_qs);
      builders::GordonCertificate cert;
      if (cg_in.size() >= 5 && cg_in.substr(cg_in.size() - 5) == ".json") {
        unsigned bits = common.precision_bits ? common.precision_bits : 256;
        precise::PrecisionGuard guard(bits);
        auto f = io::precise_sampling_from_json(io::read_json(cg_in), bits);
        std::int64_t qmax = qs.back();
        auto window = precise::sample_window(f, 1 - qmax, 2 * qmax + 1);
        cert = builders::check_gordon(window, 1 - qmax, qs, bits);
      } else {
        unsigned bits = common.precision_bits ? common.precision_bits : 256;
        precise::PrecisionGuard guard(bits);
        auto [window, n0] = io::window_from_csv(io::read_text(cg_in));
        cert = builders::check_gordon(window, n0, qs, bits);
      }
      for (const auto& s : cert.stages)
        std::printf("k=%d q=%lld deviation %s threshold %s %s\n", s.k,
                    static_cast<long long>(s.q), s.deviation.c_str(), s.threshold.c_str(),
                    s.gordon_ok ? "ok" : "VIOLATED");
      std::printf("%s\n", cert.pass ? "PASS" : "FAIL");
    }
  } catch (const validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const escalation_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}

}  // namespace flq::cli
