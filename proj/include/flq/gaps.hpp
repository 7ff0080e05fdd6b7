#pragma once

#include <utility>
#include <vector>

#include "flq/group.hpp"
#include "flq/spectrum.hpp"

namespace flq::gaps {

struct RejectedTrial {
  int t = 0;
  double witness_energy = 0.0;  // touching point with T_p = +-I
  spectrum::TraceClass witness_class = spectrum::TraceClass::parabolic;
  double gap_length = 0.0;
};

// Record of the finite gap-opening search: which trial t/M was accepted,
// what the resulting gaps are, and why earlier trials were rejected.
struct GapCertificate {
  std::int64_t period = 1;
  double eps = 0.0;
  std::int64_t M = 0;
  int t = 0;  // 0 when vacuous (p = 1)
  double perturbation = 0.0;
  std::vector<double> gap_lengths;
  std::vector<RejectedTrial> rejected;
  double tol_gap = 1e-12;
  unsigned precision_bits = 0;  // 0: decided in double precision
};

struct GapOptions {
  double tol_gap = 1e-12;
  unsigned escalation_bits = 128;  // precision for the recheck pass
};

// Perturbs f at the last site of its period block by t/M, t = 1..2p+1 with
// (2p+1)/M < eps, and returns the first trial whose spectrum has exactly p
// components.  Falls back to an extended-precision recheck before
// reporting failure.
std::pair<group::SamplingFunction, GapCertificate> open_all_gaps(
    const group::SamplingFunction& f, double eps, const GapOptions& opts = {});

// (open, closed); open + closed = p - 1.
std::pair<int, int> count_open_gaps(const group::Potential& v, double tol_gap = 1e-12);

// Revalidates an opening at elevated precision: perturbation structure,
// norm bound, minimal M, and all gaps above tol_gap.
bool verify_certificate(const group::SamplingFunction& f, const group::SamplingFunction& f_tilde,
                        const GapCertificate& cert, const GapOptions& opts = {});

}  // namespace flq::gaps
