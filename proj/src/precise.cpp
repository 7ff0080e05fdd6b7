#include "flq/precise.hpp"

#include <algorithm>
#include <cmath>

#include "flq/errors.hpp"

namespace flq::precise {

unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(static_cast<double>(bits) * 0.30103)) + 2;
}

PrecisionGuard::PrecisionGuard(unsigned bits) : saved_digits_(BigReal::default_precision()) {
  BigReal::default_precision(digits10_for_bits(bits));
}

PrecisionGuard::~PrecisionGuard() { BigReal::default_precision(saved_digits_); }

std::string to_decimal(const BigReal& x, unsigned digits10) {
  if (digits10 == 0) digits10 = static_cast<unsigned>(x.precision());
  return x.str(digits10, std::ios_base::scientific);
}

BigReal from_decimal(const std::string& s) { return BigReal(s); }

BigReal discriminant_at(const std::vector<BigReal>& values, const BigReal& energy) {
  BigReal a(1), b(0), c(0), d(1);
  for (const auto& v : values) {
    BigReal s = energy - v;
    BigReal na = s * a - c;
    BigReal nb = s * b - d;
    c = a;
    d = b;
    a = na;
    b = nb;
  }
  return a + d;
}

std::pair<BigReal, BigReal> discriminant_deriv_at(const std::vector<BigReal>& values,
                                                  const BigReal& energy) {
  BigReal a(1), b(0), c(0), d(1);
  BigReal da(0), db(0), dc(0), dd(0);
  for (const auto& v : values) {
    BigReal s = energy - v;
    BigReal na = s * a - c;
    BigReal nb = s * b - d;
    BigReal nda = s * da + a - dc;
    BigReal ndb = s * db + b - dd;
    c = a;
    d = b;
    a = na;
    b = nb;
    dc = da;
    dd = db;
    da = nda;
    db = ndb;
  }
  return {a + d, da + dd};
}

namespace {

// Bisection to full working precision; f must change sign on [lo, hi].
template <class F>
BigReal bisect(const F& f, BigReal lo, BigReal hi, unsigned bits) {
  BigReal flo = f(lo);
  if (flo == 0) return lo;
  const bool lo_pos = flo > 0;
  for (unsigned it = 0; it < bits + 8; ++it) {
    BigReal mid = (lo + hi) / 2;
    BigReal fm = f(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == lo_pos)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

PreciseBandTable refine_bands(const group::Potential& v, const spectrum::BandStructure& hint,
                              unsigned bits, double tol_gap) {
  PrecisionGuard guard(bits);
  const std::int64_t p = v.period;
  std::vector<BigReal> vals;
  vals.reserve(static_cast<std::size_t>(p));
  for (double x : v.values) vals.emplace_back(x);

  PreciseBandTable out;
  out.total_measure = 0;
  if (p == 1) {
    out.edges = {v.values[0] - 2.0, v.values[0] + 2.0};
    out.min_gap = BigReal("1e1000000");
    out.total_measure = 4;
    return out;
  }

  auto delta = [&](const BigReal& e) { return discriminant_at(vals, e); };
  auto ddelta = [&](const BigReal& e) { return discriminant_deriv_at(vals, e).second; };

  std::vector<BigReal> mids;
  for (const auto& band : hint.bands) mids.emplace_back(0.5 * (band.lo + band.hi));

  double vmin = *std::min_element(v.values.begin(), v.values.end());
  double vmax = *std::max_element(v.values.begin(), v.values.end());

  std::vector<BigReal> edges;
  edges.reserve(static_cast<std::size_t>(2 * p));

  // Outer edges: Delta crosses sigma*2 once outside the spectrum hull.
  {
    const int sb = (p % 2 == 0) ? 1 : -1;
    auto g = [&](const BigReal& e) { return BigReal(sb) * delta(e) - 2; };
    edges.push_back(bisect(g, BigReal(vmin - 3.0), mids.front(), bits));
  }
  {
    auto g = [&](const BigReal& e) { return delta(e) - 2; };
    edges.push_back(bisect(g, mids.back(), BigReal(vmax + 3.0), bits));
  }

  out.min_gap = BigReal("1e1000000");
  for (std::int64_t j = 0; j + 1 < p; ++j) {
    // Extremum of Delta between the two band midpoints.
    BigReal estar = bisect(ddelta, mids[static_cast<std::size_t>(j)],
                           mids[static_cast<std::size_t>(j + 1)], bits);
    const int sigma = (((p - 1 - j) % 2) == 0) ? 1 : -1;
    auto g = [&](const BigReal& e) { return BigReal(sigma) * delta(e) - 2; };
    BigReal overshoot = g(estar);
    PreciseGap gap;
    if (overshoot <= 0) {
      gap.closed = true;
      gap.length = 0;
      gap.lo = gap.hi = static_cast<double>(estar);
      edges.push_back(estar);
      edges.push_back(estar);
    } else {
      BigReal e1 = bisect(g, mids[static_cast<std::size_t>(j)], estar, bits);
      BigReal e2 = bisect(g, estar, mids[static_cast<std::size_t>(j + 1)], bits);
      gap.length = e2 - e1;
      gap.lo = static_cast<double>(e1);
      gap.hi = static_cast<double>(e2);
      gap.closed = gap.length < BigReal(tol_gap);
      edges.push_back(e1);
      edges.push_back(e2);
    }
    out.min_gap = (std::min)(out.min_gap, gap.length);
    out.gaps.push_back(std::move(gap));
  }

  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i + 1 < edges.size(); i += 2)
    out.total_measure += edges[i + 1] - edges[i];
  out.edges.reserve(edges.size());
  for (const auto& e : edges) out.edges.push_back(static_cast<double>(e));
  return out;
}

std::vector<double> gap_lengths(const group::Potential& v, unsigned bits, double tol_gap) {
  spectrum::BandStructure hint = spectrum::band_structure(v);
  PreciseBandTable table = refine_bands(v, hint, bits, tol_gap);
  std::vector<double> out;
  out.reserve(table.gaps.size());
  for (const auto& g : table.gaps) out.push_back(static_cast<double>(g.length));
  return out;
}

BigReal PreciseSampling::sup_norm() const {
  BigReal m(0);
  for (const auto& v : values) m = (std::max)(m, BigReal(abs(v)));
  return m;
}

PreciseSampling make_precise(const group::SamplingFunction& f) {
  PreciseSampling out{f.chain(), f.level(), {}};
  out.values.reserve(f.values().size());
  for (double v : f.values()) out.values.emplace_back(v);
  return out;
}

PreciseSampling embed(const PreciseSampling& f, int target_level) {
  if (target_level < f.level) throw validation_error("embed goes to a finer level");
  std::int64_t pk = f.period();
  std::int64_t pm = f.chain.period(target_level);
  PreciseSampling out{f.chain, target_level, {}};
  out.values.reserve(static_cast<std::size_t>(pm));
  for (std::int64_t r = 0; r < pm; ++r)
    out.values.push_back(f.values[static_cast<std::size_t>(r % pk)]);
  return out;
}

PreciseSampling periodize(const PreciseSampling& f, int target_level) {
  if (target_level > f.level)
    throw validation_error("periodize target level must not exceed the function level");
  std::int64_t pk = f.chain.period(target_level);
  std::int64_t pm = f.period();
  std::int64_t reps = pm / pk;
  PreciseSampling out{f.chain, target_level, {}};
  out.values.assign(static_cast<std::size_t>(pk), BigReal(0));
  for (std::int64_t r = 0; r < pk; ++r) {
    BigReal acc(0);
    for (std::int64_t j = 0; j < reps; ++j)
      acc += f.values[static_cast<std::size_t>(r + j * pk)];
    out.values[static_cast<std::size_t>(r)] = acc / reps;
  }
  return out;
}

PreciseSampling add(const PreciseSampling& a, const PreciseSampling& b) {
  if (!(a.chain == b.chain)) throw validation_error("sampling functions on different chains");
  const PreciseSampling& fine = a.level >= b.level ? a : b;
  PreciseSampling ae = embed(a, fine.level);
  PreciseSampling be = embed(b, fine.level);
  for (std::size_t i = 0; i < ae.values.size(); ++i) ae.values[i] += be.values[i];
  return ae;
}

BigReal sup_distance(const PreciseSampling& a, const PreciseSampling& b) {
  int lvl = std::max(a.level, b.level);
  PreciseSampling ae = embed(a, lvl);
  PreciseSampling be = embed(b, lvl);
  BigReal m(0);
  for (std::size_t i = 0; i < ae.values.size(); ++i)
    m = (std::max)(m, BigReal(abs(ae.values[i] - be.values[i])));
  return m;
}

std::vector<BigReal> sample_window(const PreciseSampling& f, std::int64_t n0, std::int64_t n1) {
  if (n1 < n0) throw validation_error("window end before start");
  std::int64_t p = f.period();
  std::vector<BigReal> out;
  out.reserve(static_cast<std::size_t>(n1 - n0));
  for (std::int64_t n = n0; n < n1; ++n) {
    std::int64_t r = n % p;
    if (r < 0) r += p;
    out.push_back(f.values[static_cast<std::size_t>(r)]);
  }
  return out;
}

}  // namespace flq::precise
