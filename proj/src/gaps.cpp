#include "flq/gaps.hpp"

#include <cmath>

#include "flq/errors.hpp"
#include "flq/precise.hpp"

namespace flq::gaps {

namespace {

std::int64_t minimal_denominator(std::int64_t p, double eps) {
  // least M with (2p+1)/M < eps
  double ratio = static_cast<double>(2 * p + 1) / eps;
  auto m = static_cast<std::int64_t>(std::floor(ratio)) + 1;
  while (static_cast<double>(2 * p + 1) / static_cast<double>(m) >= eps) ++m;
  return m;
}

group::Potential trial_potential(const group::SamplingFunction& f, double bump) {
  // omega = identity, alpha = adding machine: the potential block is the
  // value block, and T^{p-1} omega lands on the last site.
  std::vector<double> vals = f.values();
  vals.back() += bump;
  return group::make_potential(std::move(vals), "gap-opening trial");
}

}  // namespace

std::pair<group::SamplingFunction, GapCertificate> open_all_gaps(
    const group::SamplingFunction& f, double eps, const GapOptions& opts) {
  if (!(eps > 0.0)) throw validation_error("gap-opening budget eps must be positive");
  const std::int64_t p = f.period();

  GapCertificate cert;
  cert.period = p;
  cert.eps = eps;
  cert.tol_gap = opts.tol_gap;

  if (p == 1) {
    cert.M = minimal_denominator(p, eps);
    return {f, cert};  // no gaps to open
  }

  cert.M = minimal_denominator(p, eps);
  const int trials = static_cast<int>(2 * p + 1);

  for (int t = 1; t <= trials; ++t) {
    const double bump = static_cast<double>(t) / static_cast<double>(cert.M);
    group::Potential vt = trial_potential(f, bump);
    spectrum::BandStructure bs = spectrum::band_structure(vt, {opts.tol_gap});
    if (bs.all_gaps_open()) {
      cert.t = t;
      cert.perturbation = bump;
      for (const auto& g : bs.gaps) cert.gap_lengths.push_back(g.length());
      return {f.with_value(p - 1, f.values().back() + bump), cert};
    }
    RejectedTrial rej;
    rej.t = t;
    for (const auto& g : bs.gaps) {
      if (g.closed) {
        rej.witness_energy = g.lo;
        rej.gap_length = g.length();
        rej.witness_class = spectrum::trace_matrix_at(vt, g.lo, 1e-6).cls;
        break;
      }
    }
    cert.rejected.push_back(rej);
  }

  // Every trial was rejected in double precision; reclassify at higher
  // precision before giving up.
  for (int t = 1; t <= trials; ++t) {
    const double bump = static_cast<double>(t) / static_cast<double>(cert.M);
    group::Potential vt = trial_potential(f, bump);
    std::vector<double> lens = precise::gap_lengths(vt, opts.escalation_bits, opts.tol_gap);
    bool open = true;
    for (double len : lens) open = open && len > opts.tol_gap;
    if (open) {
      cert.t = t;
      cert.perturbation = bump;
      cert.gap_lengths = lens;
      cert.precision_bits = opts.escalation_bits;
      return {f.with_value(p - 1, f.values().back() + bump), cert};
    }
  }
  throw escalation_error(
      "open_all_gaps: all " + std::to_string(trials) +
      " trials rejected even at extended precision; tol_gap is likely misconfigured");
}

std::pair<int, int> count_open_gaps(const group::Potential& v, double tol_gap) {
  if (v.period == 1) return {0, 0};
  spectrum::BandStructure bs = spectrum::band_structure(v, {tol_gap});
  return {bs.open_gap_count(), bs.closed_gap_count()};
}

bool verify_certificate(const group::SamplingFunction& f, const group::SamplingFunction& f_tilde,
                        const GapCertificate& cert, const GapOptions& opts) {
  if (!(f.chain() == f_tilde.chain()) || f.level() != f_tilde.level()) return false;
  const std::int64_t p = f.period();
  if (cert.period != p) return false;
  if (cert.M != minimal_denominator(p, cert.eps)) return false;

  if (p == 1) {
    return cert.t == 0 && f.values() == f_tilde.values();
  }

  if (cert.t < 1 || cert.t > 2 * p + 1) return false;
  const double bump = static_cast<double>(cert.t) / static_cast<double>(cert.M);
  if (std::abs(cert.perturbation - bump) > 1e-15 * (1.0 + bump)) return false;
  if (!(bump < cert.eps)) return false;

  // Structure of the perturbation: last site moved by t/M, others intact.
  for (std::int64_t i = 0; i < p; ++i) {
    double want = f.values()[static_cast<std::size_t>(i)] + (i == p - 1 ? bump : 0.0);
    double got = f_tilde.values()[static_cast<std::size_t>(i)];
    if (std::abs(got - want) > 1e-14 * (1.0 + std::abs(want))) return false;
  }

  unsigned bits = std::max({opts.escalation_bits, 2 * cert.precision_bits, 128u});
  group::Potential vt = group::make_potential(f_tilde.values(), "certificate recheck");
  std::vector<double> lens = precise::gap_lengths(vt, bits, cert.tol_gap);
  if (lens.size() != static_cast<std::size_t>(p - 1)) return false;
  for (double len : lens)
    if (!(len > cert.tol_gap)) return false;
  return true;
}

}  // namespace flq::gaps
