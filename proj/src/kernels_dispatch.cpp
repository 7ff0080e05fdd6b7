#include <atomic>
#include <cstdlib>

#include "flq/errors.hpp"
#include "flq/kernels.hpp"

namespace flq::kernels {

namespace {

struct Backend {
  transfer_fn transfer;
  transfer_deriv_fn transfer_deriv;
  const char* name;
};

constexpr Backend kScalar{transfer_batch_scalar, transfer_deriv_batch_scalar, "scalar"};
#ifdef FLQ_HAVE_AVX2_TU
constexpr Backend kAvx2{transfer_batch_avx2, transfer_deriv_batch_avx2, "avx2"};
#endif

bool avx2_available() {
#ifdef FLQ_HAVE_AVX2_TU
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Backend* pick_auto() {
#ifdef FLQ_HAVE_AVX2_TU
  if (avx2_available()) return &kAvx2;
#endif
  return &kScalar;
}

const Backend* pick(const std::string& name) {
  if (name == "scalar") return &kScalar;
  if (name == "avx2") {
#ifdef FLQ_HAVE_AVX2_TU
    if (avx2_available()) return &kAvx2;
#endif
    throw validation_error("avx2 kernel requested but not available on this CPU/build");
  }
  if (name == "auto" || name.empty()) return pick_auto();
  throw validation_error("unknown kernel backend '" + name + "'");
}

std::atomic<const Backend*> g_backend{nullptr};

const Backend& active() {
  const Backend* b = g_backend.load(std::memory_order_acquire);
  if (!b) {
    const char* env = std::getenv("FLOQUET_KERNEL");
    b = pick(env ? env : "auto");
    g_backend.store(b, std::memory_order_release);
  }
  return *b;
}

}  // namespace

void transfer_batch(std::span<const double> energies, std::span<const double> potential,
                    TransferBatch& out) {
  active().transfer(energies, potential, out);
}

void transfer_deriv_batch(std::span<const double> energies, std::span<const double> potential,
                          TransferDerivBatch& out) {
  active().transfer_deriv(energies, potential, out);
}

void trace_batch(std::span<const double> energies, std::span<const double> potential,
                 std::span<double> delta) {
  TransferBatch t;
  active().transfer(energies, potential, t);
  for (std::size_t i = 0; i < energies.size(); ++i) delta[i] = t.a[i] + t.d[i];
}

void trace_deriv_batch(std::span<const double> energies, std::span<const double> potential,
                       std::span<double> delta, std::span<double> ddelta) {
  TransferDerivBatch t;
  active().transfer_deriv(energies, potential, t);
  for (std::size_t i = 0; i < energies.size(); ++i) {
    delta[i] = t.m.a[i] + t.m.d[i];
    ddelta[i] = t.da[i] + t.dd[i];
  }
}

std::string backend_name() { return active().name; }

void force_backend(const std::string& name) { g_backend.store(pick(name)); }

}  // namespace flq::kernels
