#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "flq/group.hpp"

using namespace flq;
using namespace flq::group;

TEST_CASE("chain validation") {
  CHECK_NOTHROW(make_chain({2, 4, 8}));
  CHECK_NOTHROW(make_chain({1, 1, 2}));
  CHECK_THROWS_WITH_AS(make_chain({2, 3}), "3 not divisible by 2 at level 2", validation_error);
  CHECK_THROWS_AS(make_chain({}), validation_error);
  CHECK_THROWS_AS(make_chain({0, 2}), validation_error);
}

TEST_CASE("translate on the adding machine") {
  auto chain = make_chain({2, 4, 8});
  auto alpha = adding_machine(chain);
  auto w = identity(chain);

  auto one = translate(w, alpha, 1);
  CHECK(one.residues == std::vector<std::int64_t>{1, 1, 1});
  auto four = translate(w, alpha, 4);
  CHECK(four.residues == std::vector<std::int64_t>{0, 0, 4});
  CHECK(translate(w, alpha, 0).residues == w.residues);

  // negative steps invert positive ones
  auto back = translate(translate(w, alpha, 5), alpha, -5);
  CHECK(back.residues == w.residues);
}

TEST_CASE("translate composes additively") {
  auto chain = make_chain({3, 6, 12});
  auto alpha = make_element(chain, {1, 1, 7});
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> step(-30, 30);
  for (int rep = 0; rep < 50; ++rep) {
    std::int64_t m = step(rng), n = step(rng);
    auto w = translate(identity(chain), alpha, step(rng));
    auto a = translate(translate(w, alpha, m), alpha, n);
    auto b = translate(w, alpha, m + n);
    CHECK(a.residues == b.residues);
  }
}

TEST_CASE("element compatibility enforced") {
  auto chain = make_chain({2, 4});
  CHECK_NOTHROW(make_element(chain, {1, 3}));
  CHECK_THROWS_AS(make_element(chain, {1, 2}), validation_error);
  CHECK_THROWS_AS(make_element(chain, {1}), validation_error);
}

TEST_CASE("minimality is levelwise coprimality") {
  CHECK(is_minimal(make_chain({2, 4, 8}), adding_machine(make_chain({2, 4, 8}))));
  auto c24 = make_chain({2, 4});
  CHECK_FALSE(is_minimal(c24, make_element(c24, {0, 2})));

  auto c39 = make_chain({3, 9});
  auto alpha = make_element(c39, {2, 2});
  CHECK(is_minimal(c39, alpha));
  // brute-force orbit of the level-2 quotient hits all residues
  std::set<std::int64_t> seen;
  for (int n = 0; n < 9; ++n) seen.insert(translate(identity(c39), alpha, n).residues[1]);
  CHECK(seen.size() == 9);
}

TEST_CASE("minimal orbits visit every residue in one period") {
  auto chain = make_chain({2, 6, 12});
  auto alpha = make_element(chain, {1, 5, 5});
  REQUIRE(is_minimal(chain, alpha));
  for (int level = 1; level <= chain.depth(); ++level) {
    std::int64_t p = chain.period(level);
    std::set<std::int64_t> seen;
    for (std::int64_t n = 0; n < p; ++n)
      seen.insert(translate(identity(chain), alpha, n).residues[static_cast<std::size_t>(level - 1)]);
    CHECK(static_cast<std::int64_t>(seen.size()) == p);
  }
}

TEST_CASE("sample_potential basics") {
  auto chain = make_chain({2, 4});
  SamplingFunction f1(chain, 1, {3.5, -1.25});
  auto v1 = sample_potential(f1, identity(chain), adding_machine(chain));
  CHECK(v1.period == 2);
  CHECK(v1.at(0) == 3.5);
  CHECK(v1.at(1) == -1.25);
  CHECK(v1.at(2) == 3.5);
  CHECK(v1.at(-1) == -1.25);

  SamplingFunction f2(chain, 2, {1, 2, 3, 4});
  auto v2 = sample_potential(f2, identity(chain), adding_machine(chain));
  CHECK(v2.values == std::vector<double>{1, 2, 3, 4});

  auto shifted = sample_potential(f2, make_element(chain, {1, 1}), adding_machine(chain));
  CHECK(shifted.values == std::vector<double>{2, 3, 4, 1});
}

TEST_CASE("sampled period block is a permutation of the values") {
  auto chain = make_chain({5, 15});
  SamplingFunction f(chain, 2, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14});
  auto alpha = make_element(chain, {2, 2});
  REQUIRE(is_minimal(chain, alpha));
  auto v = sample_potential(f, make_element(chain, {3, 8}), alpha);
  auto sorted = v.values;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == f.values());
}

TEST_CASE("sample window") {
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {1.0, -1.0});
  auto w = sample_window(f, identity(chain), adding_machine(chain), -2, 3);
  CHECK(w == std::vector<double>{1, -1, 1, -1, 1});
  CHECK_THROWS_AS(sample_window(f, identity(chain), adding_machine(chain), 2, 1),
                  validation_error);
}

TEST_CASE("periodize averages over cosets") {
  auto chain = make_chain({2, 4});
  SamplingFunction f(chain, 2, {1, 2, 3, 4});
  auto g = periodize(f, 1);
  CHECK(g.values() == std::vector<double>{2, 3});

  CHECK(periodize(f, 2).values() == f.values());  // identity at own level

  SamplingFunction c(chain, 2, {7, 7, 7, 7});
  CHECK(periodize(c, 1).values() == std::vector<double>{7, 7});

  CHECK_THROWS_AS(periodize(g, 2), validation_error);
}

TEST_CASE("periodize properties") {
  auto chain = make_chain({2, 4, 8});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-5, 5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> vals(8);
    for (auto& x : vals) x = val(rng);
    SamplingFunction f(chain, 3, vals);

    auto once = periodize(f, 1);
    auto twice = periodize(periodize(f, 2), 1);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(once.values()[i] == doctest::Approx(twice.values()[i]).epsilon(1e-14));

    CHECK(once.sup_norm() <= f.sup_norm() + 1e-14);

    auto sp = periodize(scale(f, 2.5), 1);
    auto ps = scale(periodize(f, 1), 2.5);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(sp.values()[i] == doctest::Approx(ps.values()[i]).epsilon(1e-14));
  }
}

TEST_CASE("embed replicates and preserves sup norm") {
  auto chain = make_chain({2, 4, 8});
  SamplingFunction f(chain, 1, {1.0, -2.0});
  auto e = f.embed(3);
  CHECK(e.period() == 8);
  CHECK(e.values() == std::vector<double>{1, -2, 1, -2, 1, -2, 1, -2});
  CHECK(e.sup_norm() == f.sup_norm());
  CHECK_THROWS_AS(e.embed(1), validation_error);
}

TEST_CASE("scale") {
  auto chain = make_chain({2});
  SamplingFunction f(chain, 1, {1.0, -1.0});
  CHECK(scale(f, 2).values() == std::vector<double>{2, -2});
  CHECK(scale(f, 0).values() == std::vector<double>{0, 0});
  CHECK(scale(f, -1).values() == std::vector<double>{-1, 1});
  CHECK(scale(f, -3).sup_norm() == 3.0);
}

TEST_CASE("hull points") {
  auto chain = make_chain({2, 4});
  SamplingFunction fxy(chain, 1, {0.5, 1.5});
  auto hull = hull_points(fxy, adding_machine(chain));
  REQUIRE(hull.size() == 2);
  CHECK(hull[0].values != hull[1].values);

  SamplingFunction fc(chain, 1, {3.0, 3.0});
  auto hc = hull_points(fc, adding_machine(chain));
  std::set<std::vector<double>> distinct;
  for (auto& h : hc) distinct.insert(h.values);
  CHECK(distinct.size() == 1);

  SamplingFunction f4(chain, 2, {1, 2, 3, 4});
  auto h4 = hull_points(f4, adding_machine(chain));
  std::set<std::vector<double>> d4;
  for (auto& h : h4) d4.insert(h.values);
  CHECK(d4.size() == 4);
}

TEST_CASE("hull cardinality divides the period") {
  auto chain = make_chain({6});
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> vals(6);
    for (auto& x : vals) x = coin(rng);  // repeated values force smaller hulls
    SamplingFunction f(chain, 1, vals);
    auto hull = hull_points(f, adding_machine(chain));
    std::set<std::vector<double>> distinct;
    for (auto& h : hull) distinct.insert(h.values);
    CHECK(6 % distinct.size() == 0);
  }
}

TEST_CASE("chain mismatch rejected") {
  auto c1 = make_chain({2, 4});
  auto c2 = make_chain({2, 6});
  CHECK_THROWS_AS(translate(identity(c1), adding_machine(c2), 1), validation_error);
  SamplingFunction f(c1, 1, {0, 0});
  CHECK_THROWS_AS(sample_potential(f, identity(c2), adding_machine(c1)), validation_error);
}

TEST_CASE("non-minimal translation rejected for sampling") {
  auto chain = make_chain({2, 4});
  SamplingFunction f(chain, 2, {1, 2, 3, 4});
  CHECK_THROWS_AS(sample_potential(f, identity(chain), make_element(chain, {0, 2})),
                  validation_error);
}
