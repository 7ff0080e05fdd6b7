#include "flq/builders.hpp"

#include <algorithm>
#include <cmath>

#include "flq/errors.hpp"
#include "flq/kernels.hpp"

namespace flq::builders {

using precise::BigReal;

double ConstructionState::beta(int k) const {
  double b = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k && j < static_cast<int>(alphas.size()); ++j)
    b = std::min(b, alphas[static_cast<std::size_t>(j)]);
  return b;
}

ConstructionState init_cantor(group::SamplingFunction f0, double eps) {
  if (!(eps > 0.0)) throw validation_error("eps must be positive");
  ConstructionState st{f0.chain(), f0, eps};
  return st;
}

ConstructionState init_ac(group::SamplingFunction f0, double eps, transform::FiniteVector u,
                          double t) {
  if (!(t > 1.0 && t < 2.0)) throw validation_error("L^t exponent must lie in (1,2)");
  ConstructionState st = init_cantor(std::move(f0), eps);
  st.ac_mode = true;
  st.u = std::move(u);
  st.t_exp = t;
  st.holder_exponent = 1.0 - 1.0 / t;
  return st;
}

namespace {

group::Potential stage_potential(const group::SamplingFunction& f) {
  return group::sample_potential(f, group::identity(f.chain()),
                                 group::adding_machine(f.chain()));
}

struct StageAttempt {
  group::SamplingFunction f_new;
  group::SamplingFunction s_new;
  StageRecord record;
};

StageAttempt run_stage(const ConstructionState& st, double eps_k, const BuilderOptions& opts) {
  const int k = st.completed_stages();
  const group::SamplingFunction& prev = k == 0 ? st.base : st.f_stage.back();
  const int level = k == 0 ? st.base.level() : prev.level() + 1;
  if (level > st.chain.depth())
    throw validation_error("chain depth " + std::to_string(st.chain.depth()) +
                           " exhausted at stage " + std::to_string(k));
  group::SamplingFunction working = prev.embed(level);

  auto [f_new, cert] = gaps::open_all_gaps(working, eps_k, opts.gap);

  StageAttempt out{f_new, f_new, {}};
  std::vector<double> s_vals(f_new.values().size(), 0.0);
  for (std::size_t i = 0; i < s_vals.size(); ++i)
    s_vals[i] = f_new.values()[i] - working.values()[i];
  out.s_new = group::SamplingFunction(st.chain, level, std::move(s_vals));

  out.record.k = k;
  out.record.level = level;
  out.record.period = f_new.period();
  out.record.s_norm = cert.perturbation;
  out.record.bands = spectrum::band_structure(stage_potential(f_new), {opts.gap.tol_gap});
  out.record.cert = std::move(cert);
  out.f_new = std::move(f_new);
  return out;
}

void accept_stage(ConstructionState& st, StageAttempt&& at) {
  st.alphas.push_back(at.record.bands.min_gap);
  st.stages.push_back(std::move(at.record));
  st.f_stage.push_back(std::move(at.f_new));
  st.s_stage.push_back(std::move(at.s_new));
}

void check_stage_invariants(const ConstructionState& st, const StageRecord& rec,
                            double beta_budget) {
  const double eps_budget = st.eps / std::ldexp(1.0, rec.k);
  if (!(rec.s_norm < eps_budget))
    throw escalation_error("stage " + std::to_string(rec.k) + " violates ||s_k|| < eps/2^k");
  if (rec.k >= 1 && !(rec.s_norm < beta_budget))
    throw escalation_error("stage " + std::to_string(rec.k) +
                           " violates ||s_k|| < beta_k/(3 2^k)");
  if (!rec.bands.all_gaps_open())
    throw escalation_error("stage " + std::to_string(rec.k) + " left a closed gap");
}

}  // namespace

void cantor_stage(ConstructionState& st, const BuilderOptions& opts) {
  const int k = st.completed_stages();
  const double eps_pow = st.eps / std::ldexp(1.0, k);
  const double beta_budget =
      k == 0 ? std::numeric_limits<double>::infinity() : st.beta(k) / (3.0 * std::ldexp(1.0, k));
  const double eps_k = std::min(eps_pow, beta_budget);

  StageAttempt at = run_stage(st, eps_k, opts);
  at.record.eps_budget = eps_pow;
  at.record.beta_budget = beta_budget;
  check_stage_invariants(st, at.record, beta_budget);
  accept_stage(st, std::move(at));
}

void ac_stage(ConstructionState& st, const BuilderOptions& opts) {
  const int k = st.completed_stages();
  if (!st.ac_mode) throw validation_error("ac_stage requires an AC-mode state");
  if (k == 0) {
    cantor_stage(st, opts);
    st.q_constant = std::max(
        st.q_constant,
        transform::lt_norm_density(stage_potential(st.f_stage.back()), st.u, st.t_exp, opts.quad));
    return;
  }

  const double eps_pow = st.eps / std::ldexp(1.0, k);
  const double beta_budget = st.beta(k) / (3.0 * std::ldexp(1.0, k));
  double eps_k = std::min(eps_pow, beta_budget);
  const double target = 1.0 / std::ldexp(1.0, k);
  group::Potential v_prev = stage_potential(st.f_stage.back().embed(st.f_stage.back().level() + 1));

  for (int halvings = 0; halvings <= opts.max_halvings; ++halvings) {
    StageAttempt at = run_stage(st, eps_k, opts);
    double dist = transform::lt_distance(v_prev, stage_potential(at.f_new), st.u, st.t_exp,
                                         opts.quad);
    if (dist <= target) {
      at.record.eps_budget = eps_pow;
      at.record.beta_budget = beta_budget;
      at.record.halvings = halvings;
      at.record.density_distance = dist;
      check_stage_invariants(st, at.record, beta_budget);
      accept_stage(st, std::move(at));
      st.q_constant = std::max(st.q_constant,
                               transform::lt_norm_density(stage_potential(st.f_stage.back()),
                                                          st.u, st.t_exp, opts.quad));
      return;
    }
    eps_k *= 0.5;
  }
  throw escalation_error("ac_stage: density distance bound unreachable after " +
                         std::to_string(opts.max_halvings) + " halvings");
}

ConstructionState build_cantor(group::SamplingFunction f0, double eps, int K,
                               const BuilderOptions& opts) {
  if (K < 0) throw validation_error("stage count must be >= 0");
  if (f0.level() + K > f0.chain().depth())
    throw validation_error("chain depth must be at least base level + K");
  ConstructionState st = init_cantor(std::move(f0), eps);
  for (int k = 0; k <= K; ++k) cantor_stage(st, opts);
  return st;
}

ConstructionState build_ac(group::SamplingFunction f0, double eps, transform::FiniteVector u,
                           double t, int K, const BuilderOptions& opts) {
  if (K < 0) throw validation_error("stage count must be >= 0");
  if (f0.level() + K > f0.chain().depth())
    throw validation_error("chain depth must be at least base level + K");
  ConstructionState st = init_ac(std::move(f0), eps, std::move(u), t);
  for (int k = 0; k <= K; ++k) ac_stage(st, opts);
  return st;
}

PersistenceReport gap_persistence_check(const ConstructionState& st) {
  PersistenceReport report;
  if (st.stages.size() < 2) return report;  // vacuous
  const auto& final_bands = st.stages.back().bands.bands;
  for (std::size_t s = 0; s + 1 < st.stages.size(); ++s) {
    const auto& gaps = st.stages[s].bands.gaps;
    for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
      if (gaps[gi].closed) continue;
      const double a = 0.5 * (gaps[gi].lo + gaps[gi].hi);
      const double third = gaps[gi].length() / 6.0;  // delta/3 with delta = length/2
      bool hit = false;
      for (const auto& b : final_bands)
        hit = hit || (b.lo < a + third && b.hi > a - third);
      if (hit) {
        report.pass = false;
        report.violations.push_back(
            {static_cast<int>(s), gi, a, gaps[gi].length() / 2.0});
      }
    }
  }
  return report;
}

AuditReport audit_records(double eps, bool ac_mode,
                          const std::vector<StageAuditEntry>& entries) {
  AuditReport report;
  auto fail = [&](const std::string& msg) {
    report.pass = false;
    report.failures.push_back(msg);
  };

  std::vector<double> alphas;
  for (const auto& rec : entries) {
    const int k = rec.k;
    const double eps_budget = eps / std::ldexp(1.0, k);
    if (!(rec.s_norm < eps_budget))
      fail("stage " + std::to_string(k) + ": ||s_k|| >= eps/2^k");
    if (k >= 1) {
      double beta = std::numeric_limits<double>::infinity();
      for (double a : alphas) beta = std::min(beta, a);
      if (!(rec.s_norm < beta / (3.0 * std::ldexp(1.0, k))))
        fail("stage " + std::to_string(k) + ": ||s_k|| >= beta_k/(3 2^k)");
    }
    double min_gap = std::numeric_limits<double>::infinity();
    for (double g : rec.gap_lengths) min_gap = std::min(min_gap, g);
    if (rec.any_closed) fail("stage " + std::to_string(k) + ": a recorded gap is closed");
    if (ac_mode && k >= 1) {
      if (!(rec.density_distance <= 1.0 / std::ldexp(1.0, k)))
        fail("stage " + std::to_string(k) + ": density distance above 2^{-k}");
    }
    alphas.push_back(min_gap);
  }
  return report;
}

AuditReport audit(const ConstructionState& st) {
  std::vector<StageAuditEntry> entries;
  for (const auto& rec : st.stages) {
    StageAuditEntry e;
    e.k = rec.k;
    e.s_norm = rec.s_norm;
    for (const auto& g : rec.bands.gaps) {
      e.gap_lengths.push_back(g.length());
      e.any_closed = e.any_closed || g.closed;
    }
    e.density_distance = rec.density_distance;
    entries.push_back(std::move(e));
  }
  AuditReport report = audit_records(st.eps, st.ac_mode, entries);
  auto fail = [&](const std::string& msg) {
    report.pass = false;
    report.failures.push_back(msg);
  };

  // Telescoping ||f_K - f_j|| < sum_{i > j} eps/2^i.
  if (!st.f_stage.empty()) {
    const auto& last = st.f_stage.back();
    for (std::size_t j = 0; j + 1 < st.f_stage.size(); ++j) {
      group::SamplingFunction fj = st.f_stage[j].embed(last.level());
      double diff = 0.0;
      for (std::size_t i = 0; i < fj.values().size(); ++i)
        diff = std::max(diff, std::abs(fj.values()[i] - last.values()[i]));
      double bound = 0.0;
      for (std::size_t i = j + 1; i < st.f_stage.size(); ++i)
        bound += st.eps / std::ldexp(1.0, static_cast<int>(i));
      if (!(diff < bound))
        fail("telescoping bound fails between stage " + std::to_string(j) + " and final");
    }
  }
  return report;
}

// ----------------------------------------------------------------------
// Gordon

namespace {

BigReal stage_budget(std::int64_t j, int k) {
  // (1/2) (jk)^{-jk}
  BigReal base(j * k);
  return BigReal(0.5) * pow(base, -static_cast<std::int64_t>(j) * k);
}

BigReal gordon_threshold(int k, std::int64_t q) {
  return pow(BigReal(k), -q);
}

}  // namespace

unsigned gordon_required_bits(const group::GroupChain& chain, int K) {
  double worst = 0.0;
  for (int k = 1; k <= K; ++k) {
    double jk = static_cast<double>(chain.period(k)) * k;
    worst = std::max(worst, jk * std::log2(jk) + 1.0);
  }
  return static_cast<unsigned>(std::ceil(worst)) + 20;
}

GordonBuild build_gordon(const group::GroupChain& chain, int K,
                         const group::SamplingFunction& f0, unsigned precision_bits) {
  if (K < 1) throw validation_error("build_gordon needs K >= 1");
  if (chain.depth() < K + 1)
    throw validation_error("chain depth " + std::to_string(chain.depth()) +
                           " too small: stage K perturbs at level K+1 = " +
                           std::to_string(K + 1));
  if (f0.level() != 1) throw validation_error("Gordon seed must live at level 1");

  const unsigned needed = std::max(53u, gordon_required_bits(chain, K));
  if (precision_bits == 0) precision_bits = std::max(needed, K >= 3 ? 128u : needed);
  if (precision_bits < needed)
    throw validation_error("build_gordon stage " + std::to_string(K) + " requires at least " +
                           std::to_string(needed) + " mantissa bits, got " +
                           std::to_string(precision_bits));

  precise::PrecisionGuard guard(precision_bits);

  precise::PreciseSampling f = precise::make_precise(f0);
  std::vector<BigReal> amplitudes;
  for (int k = 1; k <= K; ++k) {
    const std::int64_t pk = chain.period(k);
    const std::int64_t pk1 = chain.period(k + 1);
    const std::int64_t ratio = pk1 / pk;
    if (ratio < 2)
      throw validation_error("level " + std::to_string(k + 1) +
                             " must be strictly finer for a mean-zero stage perturbation");
    BigReal amp = stage_budget(chain.period(k), k) / 2;
    amplitudes.push_back(amp);

    precise::PreciseSampling s{chain, k + 1, {}};
    s.values.assign(static_cast<std::size_t>(pk1), BigReal(0));
    for (std::int64_t r = 0; r < pk1; ++r) {
      std::int64_t coset = r / pk;
      if (coset == 0)
        s.values[static_cast<std::size_t>(r)] = amp;
      else if (coset == 1)
        s.values[static_cast<std::size_t>(r)] = -amp;
    }
    f = precise::add(f, s);
  }

  GordonBuild out{f, {}, {}};
  out.certificate.precision_bits = precision_bits;

  const std::int64_t qK = chain.period(K) * K;
  out.certificate.window_lo = 1 - qK;
  out.certificate.window_hi = 2 * qK + 1;
  std::vector<BigReal> window = precise::sample_window(f, out.certificate.window_lo,
                                                       out.certificate.window_hi);

  bool all_ok = true;
  for (int k = 1; k <= K; ++k) {
    const std::int64_t j = chain.period(k);
    const std::int64_t q = j * k;
    GordonStage stage;
    stage.k = k;
    stage.j = j;
    stage.q = q;
    stage.precision_bits = precision_bits;

    BigReal budget = stage_budget(j, k);
    precise::PreciseSampling fk = precise::periodize(f, k);
    out.approximants.push_back(fk);
    BigReal approx_err = precise::sup_distance(f, fk);
    stage.budget_ok = approx_err < budget;

    BigReal threshold = gordon_threshold(k, q);
    BigReal deviation(0);
    for (std::int64_t n = 1; n <= q; ++n) {
      const auto& vn = window[static_cast<std::size_t>(n - out.certificate.window_lo)];
      const auto& vplus = window[static_cast<std::size_t>(n + q - out.certificate.window_lo)];
      const auto& vminus = window[static_cast<std::size_t>(n - q - out.certificate.window_lo)];
      deviation = (std::max)(deviation, BigReal(abs(vn - vplus)));
      deviation = (std::max)(deviation, BigReal(abs(vn - vminus)));
    }
    stage.gordon_ok = deviation <= threshold;

    stage.budget = precise::to_decimal(budget, 30);
    stage.s_norm = precise::to_decimal(amplitudes[static_cast<std::size_t>(k - 1)], 30);
    stage.approx_error = precise::to_decimal(approx_err, 30);
    stage.deviation = precise::to_decimal(deviation, 30);
    stage.threshold = precise::to_decimal(threshold, 30);
    all_ok = all_ok && stage.budget_ok && stage.gordon_ok;
    out.certificate.stages.push_back(std::move(stage));
  }
  out.certificate.pass = all_ok;
  return out;
}

GordonCertificate check_gordon(const std::vector<BigReal>& window, std::int64_t n0,
                               const std::vector<std::int64_t>& qs, unsigned precision_bits) {
  if (qs.empty()) throw validation_error("check_gordon needs at least one q");
  for (std::size_t i = 0; i + 1 < qs.size(); ++i)
    if (!(qs[i] < qs[i + 1])) throw validation_error("q sequence must be strictly increasing");
  const std::int64_t qK = qs.back();
  const std::int64_t lo = 1 - qK, hi = 2 * qK + 1;
  if (n0 > lo || n0 + static_cast<std::int64_t>(window.size()) < hi)
    throw validation_error("window must cover n in [1-q_K, 2 q_K]");

  GordonCertificate cert;
  cert.window_lo = lo;
  cert.window_hi = hi;
  cert.precision_bits = precision_bits;
  bool all_ok = true;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    const std::int64_t q = qs[i];
    GordonStage stage;
    stage.k = k;
    stage.j = q / k;
    stage.q = q;
    stage.precision_bits = precision_bits;
    BigReal threshold = gordon_threshold(k, q);
    BigReal deviation(0);
    for (std::int64_t n = 1; n <= q; ++n) {
      const auto& vn = window[static_cast<std::size_t>(n - n0)];
      const auto& vplus = window[static_cast<std::size_t>(n + q - n0)];
      const auto& vminus = window[static_cast<std::size_t>(n - q - n0)];
      deviation = (std::max)(deviation, BigReal(abs(vn - vplus)));
      deviation = (std::max)(deviation, BigReal(abs(vn - vminus)));
    }
    stage.gordon_ok = deviation <= threshold;
    stage.budget_ok = true;  // no construction budget for a bare check
    stage.deviation = precise::to_decimal(deviation, 30);
    stage.threshold = precise::to_decimal(threshold, 30);
    all_ok = all_ok && stage.gordon_ok;
    cert.stages.push_back(std::move(stage));
  }
  cert.pass = all_ok;
  return cert;
}

GordonCertificate check_gordon(const std::vector<double>& window, std::int64_t n0,
                               const std::vector<std::int64_t>& qs) {
  std::vector<BigReal> w;
  w.reserve(window.size());
  for (double v : window) w.emplace_back(v);
  return check_gordon(w, n0, qs, 53);
}

GrowthReport gordon_growth_check(const group::Potential& v, std::span<const double> energy_grid,
                                 const std::vector<std::array<double, 2>>& initial_vectors) {
  GrowthReport report;
  kernels::TransferBatch batch;
  kernels::transfer_batch(energy_grid, v.values, batch);
  for (std::size_t i = 0; i < energy_grid.size(); ++i) {
    const double e = energy_grid[i];
    const spectrum::Mat2 t{batch.a[i], batch.b[i], batch.c[i], batch.d[i]};
    const double tr = t.trace();
    for (const auto& vec : initial_vectors) {
      const double nrm = std::hypot(vec[0], vec[1]);
      const double v0 = vec[0] / nrm, v1 = vec[1] / nrm;
      const double w0 = t.a * v0 + t.b * v1;
      const double w1 = t.c * v0 + t.d * v1;
      // Cayley-Hamilton for det = 1: T_{2q} v = tr(T_q) T_q v - v and
      // T_{-q} v = tr(T_q) v - T_q v.
      const double z0 = tr * w0 - v0;
      const double z1 = tr * w1 - v1;
      const double y0 = tr * v0 - w0;
      const double y1 = tr * v1 - w1;
      const double ratio =
          std::max({std::hypot(w0, w1), std::hypot(z0, z1), std::hypot(y0, y1)});
      if (ratio < report.min_ratio) {
        report.min_ratio = ratio;
        report.argmin_energy = e;
      }
    }
  }
  report.pass = report.min_ratio >= 0.5 - 1e-12;
  return report;
}

}  // namespace flq::builders
