#include "flq/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "flq/errors.hpp"
#include "flq/kernels.hpp"

namespace flq::spectrum {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

Mat2 step_matrix(double energy, double site_value) {
  return Mat2{energy - site_value, -1.0, 1.0, 0.0};
}

Mat2 transfer(double energy, const Potential& v, std::int64_t n) {
  Mat2 t;
  if (n >= 0) {
    for (std::int64_t i = 0; i < n; ++i) t = step_matrix(energy, v.at(i)) * t;
  } else {
    for (std::int64_t i = -1; i >= n; --i) t = step_matrix(energy, v.at(i)).inverse() * t;
  }
  return t;
}

std::pair<double, double> propagate_solution(double energy, const Potential& v, std::int64_t n,
                                             double u0, double um1) {
  Mat2 t = transfer(energy, v, n);
  return {t.a * u0 + t.b * um1, t.c * u0 + t.d * um1};
}

Poly discriminant(const Potential& v) {
  // 2x2 transfer product with Poly entries.
  Poly a = Poly::constant(1.0), b = Poly::constant(0.0);
  Poly c = Poly::constant(0.0), d = Poly::constant(1.0);
  for (std::int64_t i = 0; i < v.period; ++i) {
    Poly s = Poly::x() - Poly::constant(v.at(i));
    Poly na = s * a - c;
    Poly nb = s * b - d;
    c = a;
    d = b;
    a = std::move(na);
    b = std::move(nb);
  }
  return a + d;
}

double discriminant_at(const Potential& v, double energy) {
  Mat2 t = transfer(energy, v, v.period);
  return t.trace();
}

std::pair<double, double> discriminant_deriv_at(const Potential& v, double energy) {
  // Single-energy version of the batch kernel recurrence; quadrature calls
  // this per node, so no batch buffers here.
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  double da = 0.0, db = 0.0, dc = 0.0, dd = 0.0;
  for (double vs : v.values) {
    const double s = energy - vs;
    const double na = s * a - c;
    const double nb = s * b - d;
    const double nda = s * da + a - dc;
    const double ndb = s * db + b - dd;
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

void discriminant_grid(const Potential& v, std::span<const double> energies,
                       std::span<double> delta) {
  kernels::trace_batch(energies, v.values, delta);
}

Eigen::MatrixXcd bloch_matrix(const Potential& v, double k, std::int64_t l) {
  const std::int64_t p = v.period;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(p, p);
  for (std::int64_t i = 0; i < p; ++i) m(i, i) = v.at(l + i);
  for (std::int64_t i = 0; i + 1 < p; ++i) {
    m(i, i + 1) += 1.0;
    m(i + 1, i) += 1.0;
  }
  const double kp = k * static_cast<double>(p);
  m(0, p - 1) += std::exp(std::complex<double>(0.0, -kp));
  m(p - 1, 0) += std::exp(std::complex<double>(0.0, kp));
  return m;
}

namespace {

// Eigenvalues of the real-symmetric k = 0 / kp = pi restrictions.
std::vector<double> boundary_eigenvalues(const Potential& v, double corner) {
  const std::int64_t p = v.period;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (std::int64_t i = 0; i < p; ++i) m(i, i) = v.at(i);
  for (std::int64_t i = 0; i + 1 < p; ++i) {
    m(i, i + 1) += 1.0;
    m(i + 1, i) += 1.0;
  }
  m(0, p - 1) += corner;
  m(p - 1, 0) += corner;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw escalation_error("Hermitian eigensolve failed for period " + std::to_string(p));
  std::vector<double> out(static_cast<std::size_t>(p));
  for (std::int64_t i = 0; i < p; ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return out;
}

}  // namespace

int BandStructure::open_gap_count() const {
  int n = 0;
  for (const auto& g : gaps) n += g.closed ? 0 : 1;
  return n;
}

int BandStructure::closed_gap_count() const { return static_cast<int>(gaps.size()) - open_gap_count(); }

bool BandStructure::all_gaps_open() const { return closed_gap_count() == 0; }

bool BandStructure::contains(double energy) const {
  for (const auto& b : bands)
    if (energy >= b.lo && energy <= b.hi) return true;
  return false;
}

BandStructure band_structure(const Potential& v, const BandOptions& opts) {
  const std::int64_t p = v.period;
  BandStructure bs;
  bs.period = p;
  bs.tol_gap = opts.tol_gap;
  bs.delta = discriminant(v);

  if (p == 1) {
    bs.bands = {Band{v.values[0] - 2.0, v.values[0] + 2.0}};
    bs.total_measure = 4.0;
    return bs;
  }

  std::vector<double> edges = boundary_eigenvalues(v, 1.0);
  std::vector<double> anti = boundary_eigenvalues(v, -1.0);
  edges.insert(edges.end(), anti.begin(), anti.end());
  std::sort(edges.begin(), edges.end());

  bs.bands.reserve(static_cast<std::size_t>(p));
  for (std::int64_t i = 0; i < p; ++i) {
    Band b{edges[static_cast<std::size_t>(2 * i)], edges[static_cast<std::size_t>(2 * i + 1)]};
    if (b.length() > 2.0 * kPi / static_cast<double>(p) + 1e-9)
      throw escalation_error("band longer than 2*pi/p; eigensolve output inconsistent");
    bs.bands.push_back(b);
  }
  bs.gaps.reserve(static_cast<std::size_t>(p - 1));
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i + 1 < p; ++i) {
    GapInterval g;
    g.lo = bs.bands[static_cast<std::size_t>(i)].hi;
    g.hi = bs.bands[static_cast<std::size_t>(i + 1)].lo;
    g.closed = g.length() < opts.tol_gap;
    min_gap = std::min(min_gap, g.length());
    bs.gaps.push_back(g);
  }
  bs.min_gap = min_gap;
  for (const auto& b : bs.bands) bs.total_measure += b.length();
  return bs;
}

double spectrum_measure(const BandStructure& bs) {
  const double cap = 2.0 * kPi / static_cast<double>(bs.period) + 1e-9;
  for (const auto& b : bs.bands)
    if (b.length() > cap)
      throw escalation_error("band length exceeds 2*pi/p bound");
  return bs.total_measure;
}

MeasureBound measure_upper_bound(const BandStructure& bs, double C) {
  if (C < 1.0) throw validation_error("transfer-norm lower bound C must be >= 1");
  MeasureBound out;
  out.bound = 4.0 * kPi * static_cast<double>(bs.period) / C;
  out.holds = bs.total_measure <= out.bound;
  return out;
}

TraceClassification trace_matrix_at(const Potential& v, double energy, double tol) {
  TraceClassification out;
  out.matrix = transfer(energy, v, v.period);
  out.delta = out.matrix.trace();
  const Mat2& t = out.matrix;
  auto near_scaled_identity = [&](double s) {
    return std::abs(t.a - s) <= tol && std::abs(t.d - s) <= tol && std::abs(t.b) <= tol &&
           std::abs(t.c) <= tol;
  };
  if (near_scaled_identity(1.0))
    out.cls = TraceClass::identity_plus;
  else if (near_scaled_identity(-1.0))
    out.cls = TraceClass::identity_minus;
  else if (std::abs(std::abs(out.delta) - 2.0) <= tol)
    out.cls = TraceClass::parabolic;
  else if (std::abs(out.delta) < 2.0)
    out.cls = TraceClass::elliptic;
  else
    out.cls = TraceClass::hyperbolic;
  return out;
}

const char* trace_class_name(TraceClass c) {
  switch (c) {
    case TraceClass::identity_plus: return "identity_plus";
    case TraceClass::identity_minus: return "identity_minus";
    case TraceClass::parabolic: return "parabolic";
    case TraceClass::elliptic: return "elliptic";
    case TraceClass::hyperbolic: return "hyperbolic";
  }
  return "unknown";
}

namespace {

std::vector<double> real_roots_monic(const Poly& poly, double imag_tol) {
  const auto& c = poly.coeffs();
  const int deg = poly.degree();
  if (deg < 1) return {};
  if (deg == 1) return {-c[0] / c[1]};
  const double lead = c[static_cast<std::size_t>(deg)];
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[static_cast<std::size_t>(i)] / lead;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw escalation_error("companion eigensolve failed");
  std::vector<double> roots;
  const double scale = 1.0 + comp.cwiseAbs().maxCoeff();
  for (int i = 0; i < deg; ++i) {
    auto z = solver.eigenvalues()(i);
    if (std::abs(z.imag()) <= imag_tol * scale) roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

std::vector<double> companion_band_edges(const Potential& v, double imag_tol) {
  Poly delta = discriminant(v);
  std::vector<double> edges = real_roots_monic(delta - Poly::constant(2.0), imag_tol);
  std::vector<double> lower = real_roots_monic(delta + Poly::constant(2.0), imag_tol);
  edges.insert(edges.end(), lower.begin(), lower.end());
  std::sort(edges.begin(), edges.end());

  // Polish on the numeric trace: companion roots of clustered edges
  // (near-closed gaps) carry sqrt(eps)-level error.  The Halley step stays
  // stable where Delta' vanishes at a double root.
  const Poly d2 = delta.derivative().derivative();
  for (double& e : edges) {
    for (int it = 0; it < 3; ++it) {
      auto [val, der] = discriminant_deriv_at(v, e);
      double target = std::abs(val - 2.0) < std::abs(val + 2.0) ? 2.0 : -2.0;
      double g = val - target;
      double denom = der * der - 0.5 * g * d2.eval(e);
      double step;
      if (std::abs(denom) > 1e-300)
        step = g * der / denom;
      else if (std::abs(der) > 1e-300)
        step = g / der;
      else
        break;
      if (!std::isfinite(step) || std::abs(step) > 1.0) break;
      e -= step;
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

}  // namespace flq::spectrum
