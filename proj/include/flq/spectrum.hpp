#pragma once

#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "flq/group.hpp"
#include "flq/poly.hpp"

namespace flq::spectrum {

using group::Potential;

// Unimodular 2x2 real matrix; one-step and one-period transfer maps.
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;  // [[a, b], [c, d]]

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }

  friend Mat2 operator*(const Mat2& l, const Mat2& r) {
    return Mat2{l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
                l.c * r.b + l.d * r.d};
  }
  Mat2 inverse() const { return Mat2{d, -b, -c, a}; }  // valid for det = 1
};

// S_i = [[E - v, -1], [1, 0]].
Mat2 step_matrix(double energy, double site_value);

// T_n = S_{n-1} ... S_0; negative n through inverses.
Mat2 transfer(double energy, const Potential& v, std::int64_t n);

// (u(n), u(n-1)) propagated from (u(0), u(-1)) by the difference equation.
// Same map as transfer(), kept for solution-level call sites.
std::pair<double, double> propagate_solution(double energy, const Potential& v, std::int64_t n,
                                             double u0, double um1);

// Discriminant Delta(E) = tr T_p(E) as a monic degree-p polynomial,
// computed by a transfer product with polynomial entries.
Poly discriminant(const Potential& v);

// Pointwise Delta and Delta' from the numeric transfer product; stable at
// any E, unlike evaluating high-degree monomial coefficients.
double discriminant_at(const Potential& v, double energy);
std::pair<double, double> discriminant_deriv_at(const Potential& v, double energy);
void discriminant_grid(const Potential& v, std::span<const double> energies,
                       std::span<double> delta);

// Floquet boundary-condition restriction of H to a length-p block starting
// at site l, with corner phases e^{-+ikp}; Hermitian for real k.
Eigen::MatrixXcd bloch_matrix(const Potential& v, double k, std::int64_t l = 0);

struct Band {
  double lo = 0.0, hi = 0.0;
  double length() const { return hi - lo; }
};

struct GapInterval {
  double lo = 0.0, hi = 0.0;
  bool closed = false;
  double length() const { return hi - lo; }
};

struct BandOptions {
  double tol_gap = 1e-12;  // gaps shorter than this are reported closed
};

struct BandStructure {
  std::int64_t period = 1;
  std::vector<Band> bands;        // p monotonicity bands, touching at closed gaps
  std::vector<GapInterval> gaps;  // p-1 records between consecutive bands
  double min_gap = std::numeric_limits<double>::infinity();  // infinity when p = 1
  double total_measure = 0.0;
  Poly delta;  // discriminant coefficients
  double tol_gap = 1e-12;

  int open_gap_count() const;
  int closed_gap_count() const;
  bool all_gaps_open() const;
  bool contains(double energy) const;  // inside some closed band interval
};

// Band edges from the periodic (k = 0) and antiperiodic (kp = pi) Hermitian
// eigenproblems, paired in sorted order.
BandStructure band_structure(const Potential& v, const BandOptions& opts = {});

// Sum of band lengths; checks each band against the 2*pi/p cap.
double spectrum_measure(const BandStructure& bs);

struct MeasureBound {
  double bound = 0.0;  // 4*pi*p / C
  bool holds = false;
};
// Caller certifies C >= 1 (C = 1 is always valid since det T = 1).
MeasureBound measure_upper_bound(const BandStructure& bs, double C);

enum class TraceClass { identity_plus, identity_minus, parabolic, elliptic, hyperbolic };

struct TraceClassification {
  Mat2 matrix;
  double delta = 0.0;
  TraceClass cls = TraceClass::elliptic;
};

// T_p(E) with its conjugacy class; identity_{+,-} witnesses closed gaps.
TraceClassification trace_matrix_at(const Potential& v, double energy, double tol = 1e-9);

const char* trace_class_name(TraceClass c);

// Real roots of Delta(E) -+ 2 via the companion matrix of the monic
// coefficients; the independent cross-check for band_structure edges.
std::vector<double> companion_band_edges(const Potential& v, double imag_tol = 1e-6);

}  // namespace flq::spectrum
