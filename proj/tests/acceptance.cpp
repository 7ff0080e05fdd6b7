// Acceptance suite: each criterion prints one PASS/FAIL line; the exit
// code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "flq/builders.hpp"
#include "flq/gaps.hpp"
#include "flq/io.hpp"
#include "flq/transform.hpp"

using namespace flq;
using group::make_chain;
using group::make_potential;
using group::SamplingFunction;
using transform::FiniteVector;

namespace {

constexpr double kPi = std::numbers::pi;

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<bool(std::string&)> body;
};

bool approx(double a, double b, double tol) { return std::abs(a - b) <= tol; }

group::Potential random_potential(std::mt19937_64& rng, int pmin, int pmax, double vmax) {
  std::uniform_int_distribution<int> plen(pmin, pmax);
  std::uniform_real_distribution<double> val(-vmax, vmax);
  std::vector<double> v(static_cast<std::size_t>(plen(rng)));
  for (auto& x : v) x = val(rng);
  return make_potential(std::move(v));
}

FiniteVector random_vector(std::mt19937_64& rng, int max_support) {
  std::uniform_int_distribution<int> nsup(1, max_support);
  std::uniform_int_distribution<std::int64_t> off(-3, 3);
  std::uniform_real_distribution<double> val(-2, 2);
  std::vector<std::int64_t> offs;
  std::vector<double> vals;
  int want = nsup(rng);
  while (static_cast<int>(offs.size()) < want) {
    std::int64_t o = off(rng);
    if (std::find(offs.begin(), offs.end(), o) == offs.end()) {
      offs.push_back(o);
      vals.push_back(val(rng));
    }
  }
  return FiniteVector(std::move(offs), std::move(vals));
}

// ---- criterion bodies ------------------------------------------------

bool crit_free_operator(std::string& detail) {
  auto free = make_potential({0.0});
  auto bs = spectrum::band_structure(free);
  if (bs.bands.size() != 1 || !approx(bs.bands[0].lo, -2.0, 1e-10) ||
      !approx(bs.bands[0].hi, 2.0, 1e-10)) {
    detail = "band edges off";
    return false;
  }
  auto u = FiniteVector::delta(0);
  for (int i = 0; i < 1000; ++i) {
    double e = -2.0 + 4.0 * (i + 0.5) / 1000.0;
    double want = 1.0 / (kPi * std::sqrt(4.0 - e * e));
    if (std::abs(transform::density(free, u, e) - want) > 1e-8) {
      detail = "density mismatch at E=" + std::to_string(e);
      return false;
    }
  }
  double mass = transform::spectral_mass(free, u);
  if (!approx(mass, 1.0, 1e-6)) {
    detail = "mass " + std::to_string(mass);
    return false;
  }
  return true;
}

bool crit_period2(std::string& detail) {
  auto bs = spectrum::band_structure(make_potential({1.0, -1.0}));
  double r5 = std::sqrt(5.0);
  bool ok = bs.bands.size() == 2 && approx(bs.bands[0].lo, -r5, 1e-9) &&
            approx(bs.bands[0].hi, -1.0, 1e-9) && approx(bs.bands[1].lo, 1.0, 1e-9) &&
            approx(bs.bands[1].hi, r5, 1e-9) && approx(bs.min_gap, 2.0, 1e-9);
  for (const auto& b : bs.bands) ok = ok && b.length() <= kPi + 1e-12;
  if (!ok) detail = "band/gap data off";
  return ok;
}

bool crit_cross_method(std::string& detail) {
  std::mt19937_64 rng(20240817);
  for (int rep = 0; rep < 200; ++rep) {
    auto v = random_potential(rng, 1, 8, 3.0);
    auto bs = spectrum::band_structure(v);
    if (static_cast<std::int64_t>(bs.bands.size()) > v.period) {
      detail = "more bands than the period";
      return false;
    }
    std::vector<double> eig;
    for (const auto& b : bs.bands) {
      eig.push_back(b.lo);
      eig.push_back(b.hi);
    }
    std::sort(eig.begin(), eig.end());
    auto comp = spectrum::companion_band_edges(v);
    if (comp.size() != eig.size()) {
      detail = "edge count mismatch at rep " + std::to_string(rep);
      return false;
    }
    for (std::size_t i = 0; i < eig.size(); ++i)
      if (std::abs(comp[i] - eig[i]) > 1e-8) {
        detail = "edge disagreement " + std::to_string(std::abs(comp[i] - eig[i]));
        return false;
      }
  }
  return true;
}

bool crit_parseval(std::string& detail) {
  std::mt19937_64 rng(5150);
  for (int rep = 0; rep < 50; ++rep) {
    auto v = random_potential(rng, 1, 6, 2.0);
    auto u = random_vector(rng, 4);
    double mass = transform::spectral_mass(v, u);
    if (std::abs(mass - u.norm_sq()) > 1e-6) {
      detail = "Parseval off by " + std::to_string(std::abs(mass - u.norm_sq()));
      return false;
    }
    if (rep % 5 == 0) {  // round trips are the slow part; 10 of 50 draws
      transform::BandFunction f = [&](double e) { return transform::u_hat(v, e, u); };
      auto back = transform::inverse_transform(v, f, u.offsets().front() - 1,
                                               u.offsets().back() + 2);
      for (std::size_t i = 0; i < back.offsets().size(); ++i) {
        double want = 0.0;
        for (std::size_t j = 0; j < u.offsets().size(); ++j)
          if (u.offsets()[j] == back.offsets()[i]) want = u.values()[j];
        if (std::abs(back.values()[i] - want) > 1e-5) {
          detail = "round-trip error " + std::to_string(std::abs(back.values()[i] - want));
          return false;
        }
      }
    }
  }
  return true;
}

bool crit_lt(std::string& detail) {
  auto free = make_potential({0.0});
  double got = transform::lt_norm_dkdE(free, 1.5);
  // independent oracle: 2^{-1/2} Gamma(1/4) Gamma(1/2) / Gamma(3/4)
  double oracle = std::pow(2.0, -0.5) * std::tgamma(0.25) * std::tgamma(0.5) / std::tgamma(0.75);
  if (std::abs(got - oracle) > 1e-3 || std::abs(got - 3.708) > 1e-3) {
    detail = "lt value " + std::to_string(got);
    return false;
  }
  transform::QuadratureOptions coarse, fine;
  coarse.ts_max_refinements = 9;
  fine.ts_max_refinements = 12;
  double a = transform::lt_norm_dkdE(free, 1.5, coarse);
  double b = transform::lt_norm_dkdE(free, 1.5, fine);
  if (std::abs(a - b) > 1e-6) {
    detail = "refinement instability " + std::to_string(std::abs(a - b));
    return false;
  }
  return true;
}

bool crit_gap_opening(std::string& detail) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_int_distribution<int> base(1, 4);
  for (int rep = 0; rep < 100; ++rep) {
    int p1 = base(rng);
    group::GroupChain chain({p1, 2 * p1});
    std::vector<double> vals(static_cast<std::size_t>(p1));
    for (auto& x : vals) x = val(rng);
    SamplingFunction f = SamplingFunction(chain, 1, vals).embed(2);
    const double eps = 0.5;
    gaps::GapCertificate cert;
    SamplingFunction f_tilde = f;
    try {
      std::tie(f_tilde, cert) = gaps::open_all_gaps(f, eps);
    } catch (const escalation_error& e) {
      detail = e.what();
      return false;
    }
    if (cert.t < 1 || cert.t > 2 * f.period() + 1) {
      detail = "trial index out of the pigeonhole bound";
      return false;
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i)
      diff = std::max(diff, std::abs(f_tilde.values()[i] - f.values()[i]));
    if (!(diff < eps)) {
      detail = "perturbation too large";
      return false;
    }
    auto lens = precise::gap_lengths(make_potential(f_tilde.values()), 128);
    for (double len : lens)
      if (!(len > 1e-12)) {
        detail = "a gap failed the extended-precision recheck";
        return false;
      }
  }
  return true;
}

bool crit_cantor(std::string& detail) {
  auto st = builders::build_cantor(
      SamplingFunction(make_chain({2, 4, 8, 16}), 1, {0.0, 0.0}), 0.5, 3);
  const int expected[] = {1, 3, 7, 15};
  for (int k = 0; k < 4; ++k) {
    const auto& rec = st.stages[static_cast<std::size_t>(k)];
    if (rec.bands.open_gap_count() != expected[k] || rec.bands.closed_gap_count() != 0) {
      detail = "stage " + std::to_string(k) + " gap count";
      return false;
    }
  }
  // stage norm budgets verified from the serialized log alone
  auto log = io::construction_log(st);
  auto entries = io::audit_entries_from_log(log);
  if (!builders::audit_records(0.5, false, entries).pass) {
    detail = "log audit failed";
    return false;
  }
  if (!builders::gap_persistence_check(st).pass) {
    detail = "middle-third persistence failed";
    return false;
  }
  return true;
}

bool crit_ac(std::string& detail) {
  auto st = builders::build_ac(SamplingFunction(make_chain({2, 4, 8}), 1, {0.0, 0.0}), 0.5,
                               FiniteVector::delta(0), 1.5, 2);
  for (const auto& rec : st.stages) {
    if (rec.k >= 1 && !(rec.density_distance <= 1.0 / std::ldexp(1.0, rec.k))) {
      detail = "density-distance bound violated at stage " + std::to_string(rec.k);
      return false;
    }
  }
  // Holder modulus Q |A|^{1/3} dominates the measured mass of small sets
  const auto& final_f = st.f_stage.back();
  auto v = group::sample_potential(final_f, group::identity(final_f.chain()),
                                   group::adding_machine(final_f.chain()));
  auto u = FiniteVector::delta(0);
  auto bs = spectrum::band_structure(v);
  const double amin = bs.bands.front().lo, amax = bs.bands.back().hi;
  const double alen = 1e-3;
  const double bound = st.q_constant * std::pow(alen, 1.0 / 3.0);
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> pos(amin, amax - alen);
  boost::math::quadrature::tanh_sinh<double> ts(10);
  for (int rep = 0; rep < 10; ++rep) {
    double lo = pos(rng);
    double massA = ts.integrate([&](double e) { return transform::density(v, u, e); }, lo,
                                lo + alen);
    if (!(bound >= massA)) {
      detail = "Holder bound " + std::to_string(bound) + " < mass " + std::to_string(massA);
      return false;
    }
  }
  return true;
}

bool crit_gordon(std::string& detail) {
  auto c2 = make_chain({2, 4, 8});
  auto b2 = builders::build_gordon(c2, 2, SamplingFunction(c2, 1, {0.0, 0.0}));
  if (!b2.certificate.pass || b2.certificate.precision_bits > 64) {
    detail = "K=2 did not certify in double precision";
    return false;
  }
  {
    precise::PrecisionGuard guard(64);
    auto t1 = precise::from_decimal(b2.certificate.stages[0].budget);
    auto t2 = precise::from_decimal(b2.certificate.stages[1].budget);
    if (!(static_cast<double>(t1) == 0.125) ||
        std::abs(static_cast<double>(t2) - 2.98023223876953125e-08) > 1e-18) {
      detail = "K=2 thresholds off";
      return false;
    }
  }

  auto c3 = make_chain({2, 4, 8, 16});
  auto b3 = builders::build_gordon(c3, 3, SamplingFunction(c3, 1, {0.0, 0.0}));
  if (!b3.certificate.pass || b3.certificate.precision_bits < 128) {
    detail = "K=3 did not certify at >= 128 bits";
    return false;
  }
  {
    precise::PrecisionGuard guard(256);
    auto t3 = precise::from_decimal(b3.certificate.stages[2].budget);
    if (std::abs(static_cast<double>(t3) - 3.7488684691415196e-34) > 1e-44) {
      detail = "K=3 threshold is not (1/2) 24^{-24}";
      return false;
    }
  }

  std::mt19937_64 rng(1717);
  for (int rep = 0; rep < 20; ++rep) {
    auto v = random_potential(rng, 1, 6, 3.0);
    auto bs = spectrum::band_structure(v);
    std::vector<double> grid;
    double lo = bs.bands.front().lo - 0.5, hi = bs.bands.back().hi + 0.5;
    for (int i = 0; i < 1000; ++i) grid.push_back(lo + (hi - lo) * (i + 0.5) / 1000.0);
    auto rep3 = builders::gordon_growth_check(v, grid);
    if (!(rep3.min_ratio >= 0.5 - 1e-12)) {
      detail = "growth ratio " + std::to_string(rep3.min_ratio);
      return false;
    }
  }
  return true;
}

bool crit_negative_controls(std::string& detail) {
  // tampered gap certificate
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {0.0, 0.0});
  auto [f_tilde, cert] = gaps::open_all_gaps(f, 0.5);
  auto bad = cert;
  bad.t += 1;
  if (gaps::verify_certificate(f, f_tilde, bad)) {
    detail = "tampered certificate accepted";
    return false;
  }

  // inflated stage norm in a serialized log
  auto st = builders::build_cantor(
      SamplingFunction(make_chain({2, 4, 8}), 1, {0.0, 0.0}), 0.5, 2);
  auto log = io::construction_log(st);
  log["stages"][2]["s_norm"] = 0.4;
  if (builders::audit_records(0.5, false, io::audit_entries_from_log(log)).pass) {
    detail = "inflated norm passed the audit";
    return false;
  }

  // V(n) = n is not Gordon at k = 1
  std::vector<double> ramp;
  for (int n = -7; n <= 16; ++n) ramp.push_back(n);
  auto check = builders::check_gordon(ramp, -7, {2, 8});
  if (check.pass || check.stages[0].gordon_ok) {
    detail = "linear potential passed check_gordon";
    return false;
  }
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "free operator closed forms (bands, density, mass)", 1.0, crit_free_operator},
      {2, "period-2 potential [1,-1] band structure", 5.0, crit_period2},
      {3, "Bloch edges vs companion roots, 200 random potentials", 60.0, crit_cross_method},
      {4, "Parseval and inverse-transform round trips", 120.0, crit_parseval},
      {5, "L^t functional of dk/dE vs independent oracle", 30.0, crit_lt},
      {6, "gap opening on 100 period-doubled potentials", 120.0, crit_gap_opening},
      {7, "Cantor builder K=3 with log audit and persistence", 300.0, crit_cantor},
      {8, "AC builder K=2 with density control and Holder bound", 600.0, crit_ac},
      {9, "Gordon builders (double and extended precision) and growth", 300.0, crit_gordon},
      {10, "negative controls", 60.0, crit_negative_controls},
  };

  int failures = 0;
  for (auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("runtime ") + std::to_string(secs) +
                "s over " + std::to_string(c.limit_seconds) + "s";
    }
    std::printf("%s  %2d. %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(), secs,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
