#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "flq/spectrum.hpp"

namespace flq::transform {

using group::Potential;
using spectrum::Band;
using spectrum::BandStructure;

using cdouble = std::complex<double>;

// Finitely supported real vector on Z.
class FiniteVector {
 public:
  FiniteVector() = default;
  FiniteVector(std::vector<std::int64_t> offsets, std::vector<double> values);

  static FiniteVector delta(std::int64_t n = 0);
  // "offset:value,offset:value" as used by the CLI.
  static FiniteVector parse(const std::string& spec);

  const std::vector<std::int64_t>& offsets() const { return offsets_; }
  const std::vector<double>& values() const { return values_; }
  bool empty() const { return offsets_.empty(); }
  double norm_sq() const;
  FiniteVector scaled(double s) const;

 private:
  std::vector<std::int64_t> offsets_;  // sorted, unique
  std::vector<double> values_;
};

// Bloch-wave data at an elliptic energy: quasimomentum, the two Floquet
// solutions over one period, and |dk/dE|.
struct FloquetPoint {
  double energy = 0.0;
  double k = 0.0;
  double dk_dE = 0.0;
  std::vector<cdouble> phi_plus, phi_minus;  // phi_minus = conj(phi_plus)
  int phase_site = 0;  // first nonvanishing coordinate made positive real
};

struct QuadratureOptions {
  double abs_tol = 1e-8;   // per-band target
  double rel_tol = 1e-6;   // fallback when the integral is large
  int max_depth = 15;      // adaptive Gauss-Kronrod interval splits
  std::size_t ts_max_refinements = 12;  // tanh-sinh levels for singular integrands
  double ts_rel_error_cap = 1e-2;  // |g1-g2| kinks cap the estimate near 1e-3
  double k_edge_exclusion = 1e-12;      // in k, per band endpoint
};

// k with Delta(E) = 2 cos(kp); domain error off the spectrum.
double quasimomentum(const Potential& v, double energy);

// |dk/dE| = |Delta'(E)| / (2p sin(kp)); throws at band edges where it
// diverges like an inverse square root.
double dk_dE(const Potential& v, double energy);

// Floquet solutions at an elliptic energy (|Delta| < 2), normalized so
// sum_{j=0}^{p-1} |phi_j|^2 = 1.
FloquetPoint floquet_solutions(const Potential& v, double energy);

// u_hat^{+-}(E) = sum_n conj(phi^{+-}_n) u_n with the Floquet extension.
std::pair<cdouble, cdouble> u_hat(const Potential& v, double energy, const FiniteVector& u);
std::pair<cdouble, cdouble> u_hat(const FloquetPoint& fp, std::int64_t period,
                                  const FiniteVector& u);

// Spectral-measure density g_{V,u}(E) = (p/2pi)(|u_hat+|^2 + |u_hat-|^2)
// |dk/dE|; zero off the spectrum.  With the per-site quasimomentum k in
// (0, pi/p), the factor p makes g independent of which period represents V
// and gives int g dE = ||u||^2 exactly (sum_b |phi^(b)_n|^2 = 1 at fixed k).
double density(const Potential& v, const FiniteVector& u, double energy);

// Total mass of the spectral measure; equals ||u||^2 (unitarity).
double spectral_mass(const Potential& v, const FiniteVector& u,
                     const QuadratureOptions& opts = {});

// Inverse transform for band functions f^{+-}(E): u_n = 1/2 int [phi+ f+ +
// phi- f-] drho.  Used for round-trip checks against u_hat.
using BandFunction = std::function<std::pair<cdouble, cdouble>(double energy)>;
FiniteVector inverse_transform(const Potential& v, const BandFunction& f, std::int64_t site_lo,
                               std::int64_t site_hi, const QuadratureOptions& opts = {});

// int_sigma |dk/dE|^t dE for t in (1,2), evaluated in the k variable where
// the edge singularity becomes |sin(kp)|^{1-t}.
double lt_norm_dkdE(const Potential& v, double t, const QuadratureOptions& opts = {});

// int_sigma g_{V,u}(E)^t dE, same substitution.
double lt_norm_density(const Potential& v, const FiniteVector& u, double t,
                       const QuadratureOptions& opts = {});

// ( int |g_{V1,u} - g_{V2,u}|^t dE )^{1/t} over the union of spectra, with
// g = 0 off-spectrum.  Potentials are replicated to a common period first.
double lt_distance(const Potential& v1, const Potential& v2, const FiniteVector& u, double t,
                   const QuadratureOptions& opts = {});

struct DensityProfile {
  struct Row {
    double energy, k, g;
  };
  struct BandBlock {
    Band band;
    std::vector<Row> rows;
    double mass = 0.0;  // integral of g over this band
  };
  std::vector<BandBlock> bands;
  double total_mass = 0.0;
  double max_uhat_sq = 0.0;  // observed bound M on |u_hat|^2
};

DensityProfile sample_density_profile(const Potential& v, const FiniteVector& u,
                                      int points_per_band,
                                      const QuadratureOptions& opts = {});

// Scan max_{1<=n<=nmax} ||T_n(E, shifted V)|| over all cyclic shifts and a
// spectrum grid; the min over E certifies a transfer-norm lower bound C.
double scan_transfer_norm_bound(const Potential& v, int grid_points, std::int64_t nmax);

}  // namespace flq::transform
