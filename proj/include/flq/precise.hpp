#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

#include "flq/group.hpp"
#include "flq/spectrum.hpp"

namespace flq::precise {

using BigReal = boost::multiprecision::mpfr_float;

unsigned digits10_for_bits(unsigned bits);

// Scoped default precision for mpfr_float temporaries.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned bits);
  ~PrecisionGuard();
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_digits_;
};

std::string to_decimal(const BigReal& x, unsigned digits10 = 0);
BigReal from_decimal(const std::string& s);

// Discriminant and derivative by transfer product in extended precision.
BigReal discriminant_at(const std::vector<BigReal>& values, const BigReal& energy);
std::pair<BigReal, BigReal> discriminant_deriv_at(const std::vector<BigReal>& values,
                                                  const BigReal& energy);

struct PreciseGap {
  double lo = 0.0, hi = 0.0;  // rounded endpoints
  BigReal length;             // 0 when closed
  bool closed = true;
};

struct PreciseBandTable {
  std::vector<double> edges;  // 2p sorted edges, rounded
  std::vector<PreciseGap> gaps;
  BigReal min_gap;  // over all gap records; infinity-like huge for p = 1
  BigReal total_measure;
};

// Re-derives the gap table of a periodic potential at `bits` precision from
// discriminant root isolation, independent of the Hermitian eigensolve
// route.  `hint` supplies the bracketing band midpoints.
PreciseBandTable refine_bands(const group::Potential& v, const spectrum::BandStructure& hint,
                              unsigned bits, double tol_gap);

// Convenience: precise gap lengths rounded to double.
std::vector<double> gap_lengths(const group::Potential& v, unsigned bits,
                                double tol_gap = 1e-12);

// Sampling function with extended-precision values; used by the Gordon
// builder where stage perturbations sit far below double epsilon.
struct PreciseSampling {
  group::GroupChain chain;
  int level;
  std::vector<BigReal> values;

  std::int64_t period() const { return chain.period(level); }
  BigReal sup_norm() const;
};

PreciseSampling make_precise(const group::SamplingFunction& f);
PreciseSampling embed(const PreciseSampling& f, int target_level);
PreciseSampling periodize(const PreciseSampling& f, int target_level);
PreciseSampling add(const PreciseSampling& a, const PreciseSampling& b);  // at a's level
BigReal sup_distance(const PreciseSampling& a, const PreciseSampling& b);

// V(n) over [n0, n1) with omega = identity and the adding machine.
std::vector<BigReal> sample_window(const PreciseSampling& f, std::int64_t n0, std::int64_t n1);

}  // namespace flq::precise
