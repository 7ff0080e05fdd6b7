#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flq::kernels {

// One-period transfer matrices T_p(E) = S_{p-1} ... S_0 with
// S_i = [[E - V(i), -1], [1, 0]], evaluated for a batch of energies.
// a,b,c,d are the entries [[a,b],[c,d]] per energy; da..dd the derivatives
// with respect to E when requested.
struct TransferBatch {
  std::vector<double> a, b, c, d;
  void resize(std::size_t n) {
    a.assign(n, 0.0);
    b.assign(n, 0.0);
    c.assign(n, 0.0);
    d.assign(n, 0.0);
  }
};

struct TransferDerivBatch {
  TransferBatch m;
  std::vector<double> da, db, dc, dd;
  void resize(std::size_t n) {
    m.resize(n);
    da.assign(n, 0.0);
    db.assign(n, 0.0);
    dc.assign(n, 0.0);
    dd.assign(n, 0.0);
  }
};

using transfer_fn = void (*)(std::span<const double> energies, std::span<const double> potential,
                             TransferBatch& out);
using transfer_deriv_fn = void (*)(std::span<const double> energies,
                                   std::span<const double> potential, TransferDerivBatch& out);

// Reference kernels (always available).
void transfer_batch_scalar(std::span<const double> energies, std::span<const double> potential,
                           TransferBatch& out);
void transfer_deriv_batch_scalar(std::span<const double> energies,
                                 std::span<const double> potential, TransferDerivBatch& out);

#ifdef FLQ_HAVE_AVX2_TU
void transfer_batch_avx2(std::span<const double> energies, std::span<const double> potential,
                         TransferBatch& out);
void transfer_deriv_batch_avx2(std::span<const double> energies,
                               std::span<const double> potential, TransferDerivBatch& out);
#endif

// Dispatched entry points.  Backend is picked once from CPU features; the
// FLOQUET_KERNEL environment variable ("scalar" or "avx2") overrides.
void transfer_batch(std::span<const double> energies, std::span<const double> potential,
                    TransferBatch& out);
void transfer_deriv_batch(std::span<const double> energies, std::span<const double> potential,
                          TransferDerivBatch& out);

// Discriminant values trace(T_p(E)) on a grid.
void trace_batch(std::span<const double> energies, std::span<const double> potential,
                 std::span<double> delta);
// Discriminant and its E-derivative on a grid.
void trace_deriv_batch(std::span<const double> energies, std::span<const double> potential,
                       std::span<double> delta, std::span<double> ddelta);

std::string backend_name();
void force_backend(const std::string& name);  // "scalar", "avx2", or "auto"

}  // namespace flq::kernels
