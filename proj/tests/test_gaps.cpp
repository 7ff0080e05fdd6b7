#include <doctest.h>

#include <random>

#include "flq/gaps.hpp"
#include "flq/precise.hpp"

using namespace flq;
using namespace flq::gaps;
using group::GroupChain;
using group::SamplingFunction;
using group::make_chain;
using group::make_potential;

TEST_CASE("open_all_gaps on the free period-2 function") {
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {0.0, 0.0});
  auto [f_tilde, cert] = open_all_gaps(f, 0.5);
  CHECK(cert.M == 11);
  CHECK(cert.t == 1);
  CHECK(cert.perturbation == doctest::Approx(1.0 / 11.0).epsilon(1e-15));
  CHECK(f_tilde.values()[0] == 0.0);
  CHECK(f_tilde.values()[1] == doctest::Approx(1.0 / 11.0).epsilon(1e-15));
  REQUIRE(cert.gap_lengths.size() == 1);
  // Delta = E(E - 1/11) - 2 hits -2 at E = 0 and E = 1/11
  CHECK(cert.gap_lengths[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-10));
  CHECK(cert.rejected.empty());
}

TEST_CASE("open_all_gaps keeps already open gaps") {
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {1.0, -1.0});
  auto [f_tilde, cert] = open_all_gaps(f, 0.5);
  CHECK(cert.t == 1);
  CHECK(cert.perturbation == doctest::Approx(1.0 / 11.0));
  CHECK(cert.gap_lengths[0] > 1.5);  // the (-1, 1) gap moved slightly, still wide open
}

TEST_CASE("open_all_gaps is vacuous for period 1") {
  auto chain = make_chain({1});
  SamplingFunction f(chain, 1, {0.7});
  auto [f_tilde, cert] = open_all_gaps(f, 0.25);
  CHECK(cert.t == 0);
  CHECK(cert.perturbation == 0.0);
  CHECK(f_tilde.values() == f.values());
  CHECK(cert.gap_lengths.empty());
}

TEST_CASE("open_all_gaps input validation") {
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {0.0, 0.0});
  CHECK_THROWS_AS(open_all_gaps(f, 0.0), validation_error);
  CHECK_THROWS_AS(open_all_gaps(f, -1.0), validation_error);
}

TEST_CASE("open_all_gaps escalates and reports unreachable tolerances") {
  // A tol_gap wider than any achievable gap rejects every trial, first in
  // double precision and then at the extended-precision recheck.
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {0.0, 0.0});
  GapOptions opts;
  opts.tol_gap = 10.0;
  CHECK_THROWS_AS(open_all_gaps(f, 0.5, opts), escalation_error);
}

TEST_CASE("minimal denominator is strict") {
  // (2p+1)/M < eps must be strict: eps = 0.5, p = 2 gives M = 11, not 10
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {0.3, -0.4});
  auto [f_tilde, cert] = open_all_gaps(f, 0.5);
  CHECK(cert.M == 11);
  CHECK(static_cast<double>(2 * cert.period + 1) / static_cast<double>(cert.M) < 0.5);
  auto [f2, cert2] = open_all_gaps(f, 1.0 / 3.0);
  CHECK(cert2.M == 16);
}

TEST_CASE("engineered closed gaps open within the trial bound") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_int_distribution<int> base(1, 4);
  for (int rep = 0; rep < 10; ++rep) {
    int p1 = base(rng);
    GroupChain chain({p1, 2 * p1});
    std::vector<double> vals(static_cast<std::size_t>(p1));
    for (auto& x : vals) x = val(rng);
    SamplingFunction coarse(chain, 1, vals);
    SamplingFunction f = coarse.embed(2);  // period-doubled: closed gaps engineered

    auto before = count_open_gaps(make_potential(f.values()));
    CHECK(before.second >= 1);

    double eps = 0.5;
    auto [f_tilde, cert] = open_all_gaps(f, eps);
    CHECK(cert.t >= 1);
    CHECK(cert.t <= 2 * f.period() + 1);
    CHECK(static_cast<int>(cert.rejected.size()) < 2 * f.period() + 1);
    double diff = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i)
      diff = std::max(diff, std::abs(f_tilde.values()[i] - f.values()[i]));
    CHECK(diff < eps);
    CHECK(diff == doctest::Approx(cert.perturbation));

    auto after = count_open_gaps(make_potential(f_tilde.values()), cert.tol_gap);
    CHECK(after.second == 0);
    CHECK(after.first == f.period() - 1);
  }
}

TEST_CASE("determinism of the accepted trial") {
  auto chain = make_chain({3, 6});
  SamplingFunction f = SamplingFunction(chain, 1, {0.4, -0.2, 1.1}).embed(2);
  auto r1 = open_all_gaps(f, 0.3);
  auto r2 = open_all_gaps(f, 0.3);
  CHECK(r1.second.t == r2.second.t);
  CHECK(r1.second.M == r2.second.M);
  CHECK(r1.first.values() == r2.first.values());
}

TEST_CASE("count_open_gaps") {
  CHECK(count_open_gaps(make_potential({0.0, 0.0})) == std::pair<int, int>{0, 1});
  CHECK(count_open_gaps(make_potential({1.0, -1.0})) == std::pair<int, int>{1, 0});
  CHECK(count_open_gaps(make_potential({2.5})) == std::pair<int, int>{0, 0});
}

TEST_CASE("rejected trials carry a closed-gap witness") {
  // The embedded free function starts with a closed gap; any trial the
  // search rejected must carry a +-identity witness at the touching point.
  auto chain = make_chain({1, 2});
  SamplingFunction f = SamplingFunction(chain, 1, {0.0}).embed(2);
  auto [f_tilde, cert] = open_all_gaps(f, 0.5);
  CHECK(cert.t >= 1);
  for (const auto& rej : cert.rejected) {
    CHECK((rej.witness_class == spectrum::TraceClass::identity_plus ||
           rej.witness_class == spectrum::TraceClass::identity_minus));
  }
}

TEST_CASE("verify_certificate accepts genuine outputs") {
  auto chain = make_chain({2, 4});
  SamplingFunction f = SamplingFunction(chain, 1, {0.2, -0.5}).embed(2);
  auto [f_tilde, cert] = open_all_gaps(f, 0.4);
  CHECK(verify_certificate(f, f_tilde, cert));
}

TEST_CASE("verify_certificate rejects tampering") {
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {0.0, 0.0});
  auto [f_tilde, cert] = open_all_gaps(f, 0.5);
  REQUIRE(verify_certificate(f, f_tilde, cert));

  auto bad_t = cert;
  bad_t.t += 1;
  CHECK_FALSE(verify_certificate(f, f_tilde, bad_t));

  auto bad_m = cert;
  bad_m.M *= 2;
  CHECK_FALSE(verify_certificate(f, f_tilde, bad_m));

  auto bad_f = f_tilde.with_value(0, f_tilde.values()[0] + 1e-6);
  CHECK_FALSE(verify_certificate(f, bad_f, cert));

  auto stale_eps = cert;
  stale_eps.eps = cert.perturbation * 0.5;  // claims a budget the bump violates
  CHECK_FALSE(verify_certificate(f, f_tilde, stale_eps));
}

TEST_CASE("verify_certificate vacuous case") {
  auto chain = make_chain({1});
  SamplingFunction f(chain, 1, {1.5});
  auto [f_tilde, cert] = open_all_gaps(f, 0.3);
  CHECK(verify_certificate(f, f_tilde, cert));
}

TEST_CASE("precise gap table agrees with the eigensolver route") {
  auto pm = make_potential({1.0, -1.0});
  auto lens = precise::gap_lengths(pm, 128);
  REQUIRE(lens.size() == 1);
  CHECK(lens[0] == doctest::Approx(2.0).epsilon(1e-13));

  auto closed = precise::gap_lengths(make_potential({0.0, 0.0}), 128);
  REQUIRE(closed.size() == 1);
  CHECK(closed[0] == 0.0);

  std::mt19937_64 rng(999);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> vals(4);
    for (auto& x : vals) x = val(rng);
    auto v = make_potential(vals);
    auto bs = spectrum::band_structure(v);
    auto table = precise::refine_bands(v, bs, 128, 1e-12);
    REQUIRE(table.gaps.size() == bs.gaps.size());
    for (std::size_t i = 0; i < bs.gaps.size(); ++i)
      CHECK(static_cast<double>(table.gaps[i].length) ==
            doctest::Approx(bs.gaps[i].length()).epsilon(1e-10));
    std::vector<double> eig;
    for (const auto& b : bs.bands) {
      eig.push_back(b.lo);
      eig.push_back(b.hi);
    }
    std::sort(eig.begin(), eig.end());
    REQUIRE(table.edges.size() == eig.size());
    for (std::size_t i = 0; i < eig.size(); ++i)
      CHECK(table.edges[i] == doctest::Approx(eig[i]).epsilon(1e-11));
  }
}

TEST_CASE("precise sampling arithmetic") {
  precise::PrecisionGuard guard(160);
  auto chain = make_chain({2, 4});
  SamplingFunction f(chain, 1, {0.5, -0.5});
  auto pf = precise::make_precise(f);
  CHECK(static_cast<double>(pf.sup_norm()) == 0.5);

  auto embedded = precise::embed(pf, 2);
  CHECK(embedded.values.size() == 4);
  CHECK(static_cast<double>(embedded.values[2]) == 0.5);

  auto avg = precise::periodize(embedded, 1);
  CHECK(static_cast<double>(precise::sup_distance(avg, pf)) == 0.0);

  // tiny perturbations survive the round trip far below double epsilon
  precise::PreciseSampling bump{chain, 2, {}};
  precise::BigReal amp = precise::from_decimal("1e-40");
  bump.values = {amp, -amp, amp, -amp};
  auto sum = precise::add(embedded, bump);
  // 160-bit arithmetic rounds 0.5 + 1e-40 at ~5e-49 absolute
  CHECK(static_cast<double>(abs(precise::sup_distance(sum, embedded) - amp)) < 1e-45);
  auto window = precise::sample_window(sum, -2, 6);
  CHECK(window.size() == 8);
  CHECK(static_cast<double>(abs(window[2] - (pf.values[0] + amp))) < 1e-45);
}
