#include <immintrin.h>

#include "flq/kernels.hpp"

// Four energies per lane; the site recurrence is the same mul/sub sequence
// as the scalar kernel, so results are bit-identical.

namespace flq::kernels {

namespace {

inline void store4(std::vector<double>& dst, std::size_t i, __m256d v) {
  _mm256_storeu_pd(dst.data() + i, v);
}

}  // namespace

void transfer_batch_avx2(std::span<const double> energies, std::span<const double> potential,
                         TransferBatch& out) {
  const std::size_t n = energies.size();
  out.resize(n);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d e = _mm256_loadu_pd(energies.data() + i);
    __m256d a = _mm256_set1_pd(1.0), b = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd(), d = _mm256_set1_pd(1.0);
    for (double vsite : potential) {
      __m256d s = _mm256_sub_pd(e, _mm256_set1_pd(vsite));
      __m256d na = _mm256_sub_pd(_mm256_mul_pd(s, a), c);
      __m256d nb = _mm256_sub_pd(_mm256_mul_pd(s, b), d);
      c = a;
      d = b;
      a = na;
      b = nb;
    }
    store4(out.a, i, a);
    store4(out.b, i, b);
    store4(out.c, i, c);
    store4(out.d, i, d);
  }
  if (i < n) {
    TransferBatch tail;
    transfer_batch_scalar(energies.subspan(i), potential, tail);
    for (std::size_t j = 0; i + j < n; ++j) {
      out.a[i + j] = tail.a[j];
      out.b[i + j] = tail.b[j];
      out.c[i + j] = tail.c[j];
      out.d[i + j] = tail.d[j];
    }
  }
}

void transfer_deriv_batch_avx2(std::span<const double> energies,
                               std::span<const double> potential, TransferDerivBatch& out) {
  const std::size_t n = energies.size();
  out.resize(n);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d e = _mm256_loadu_pd(energies.data() + i);
    __m256d a = _mm256_set1_pd(1.0), b = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd(), d = _mm256_set1_pd(1.0);
    __m256d da = _mm256_setzero_pd(), db = _mm256_setzero_pd();
    __m256d dc = _mm256_setzero_pd(), dd = _mm256_setzero_pd();
    for (double vsite : potential) {
      __m256d s = _mm256_sub_pd(e, _mm256_set1_pd(vsite));
      __m256d na = _mm256_sub_pd(_mm256_mul_pd(s, a), c);
      __m256d nb = _mm256_sub_pd(_mm256_mul_pd(s, b), d);
      __m256d nda = _mm256_sub_pd(_mm256_add_pd(_mm256_mul_pd(s, da), a), dc);
      __m256d ndb = _mm256_sub_pd(_mm256_add_pd(_mm256_mul_pd(s, db), b), dd);
      c = a;
      d = b;
      a = na;
      b = nb;
      dc = da;
      dd = db;
      da = nda;
      db = ndb;
    }
    store4(out.m.a, i, a);
    store4(out.m.b, i, b);
    store4(out.m.c, i, c);
    store4(out.m.d, i, d);
    store4(out.da, i, da);
    store4(out.db, i, db);
    store4(out.dc, i, dc);
    store4(out.dd, i, dd);
  }
  if (i < n) {
    TransferDerivBatch tail;
    transfer_deriv_batch_scalar(energies.subspan(i), potential, tail);
    for (std::size_t j = 0; i + j < n; ++j) {
      out.m.a[i + j] = tail.m.a[j];
      out.m.b[i + j] = tail.m.b[j];
      out.m.c[i + j] = tail.m.c[j];
      out.m.d[i + j] = tail.m.d[j];
      out.da[i + j] = tail.da[j];
      out.db[i + j] = tail.db[j];
      out.dc[i + j] = tail.dc[j];
      out.dd[i + j] = tail.dd[j];
    }
  }
}

}  // namespace flq::kernels
