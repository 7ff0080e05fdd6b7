#include "flq/kernels.hpp"

namespace flq::kernels {

void transfer_batch_scalar(std::span<const double> energies, std::span<const double> potential,
                           TransferBatch& out) {
  const std::size_t n = energies.size();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = energies[i];
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    for (double v : potential) {
      const double s = e - v;
      const double na = s * a - c;
      const double nb = s * b - d;
      c = a;
      d = b;
      a = na;
      b = nb;
    }
    out.a[i] = a;
    out.b[i] = b;
    out.c[i] = c;
    out.d[i] = d;
  }
}

void transfer_deriv_batch_scalar(std::span<const double> energies,
                                 std::span<const double> potential, TransferDerivBatch& out) {
  const std::size_t n = energies.size();
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = energies[i];
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    double da = 0.0, db = 0.0, dc = 0.0, dd = 0.0;
    for (double v : potential) {
      const double s = e - v;
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
    out.m.a[i] = a;
    out.m.b[i] = b;
    out.m.c[i] = c;
    out.m.d[i] = d;
    out.da[i] = da;
    out.db[i] = db;
    out.dc[i] = dc;
    out.dd[i] = dd;
  }
}

}  // namespace flq::kernels
