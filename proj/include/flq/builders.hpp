#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flq/gaps.hpp"
#include "flq/group.hpp"
#include "flq/precise.hpp"
#include "flq/transform.hpp"

namespace flq::builders {

// One accepted stage of the Cantor/AC construction.
struct StageRecord {
  int k = 0;
  int level = 1;
  std::int64_t period = 1;
  double s_norm = 0.0;       // ||s_k||, equals t/M of the accepted trial
  double eps_budget = 0.0;   // eps / 2^k
  double beta_budget = std::numeric_limits<double>::infinity();  // beta_k / (3 2^k), k >= 1
  int halvings = 0;          // AC: budget halvings before the distance bound held
  double density_distance = std::numeric_limits<double>::quiet_NaN();  // AC, k >= 1
  spectrum::BandStructure bands;
  gaps::GapCertificate cert;
};

struct ConstructionState {
  group::GroupChain chain;
  group::SamplingFunction base;  // the f the construction starts from
  double eps = 0.0;
  bool ac_mode = false;
  transform::FiniteVector u;
  double t_exp = 0.0;

  std::vector<StageRecord> stages;
  std::vector<group::SamplingFunction> f_stage;  // f_k per stage
  std::vector<group::SamplingFunction> s_stage;  // s_k per stage
  std::vector<double> alphas;                    // min gap per stage
  double q_constant = 0.0;   // AC: sup_k int g_k^t dE
  double holder_exponent = 0.0;  // 1 - 1/t

  int completed_stages() const { return static_cast<int>(stages.size()); }
  double beta(int k) const;  // min of alphas[0..k-1]
};

struct BuilderOptions {
  gaps::GapOptions gap;
  transform::QuadratureOptions quad;
  int max_halvings = 60;
};

ConstructionState init_cantor(group::SamplingFunction f0, double eps);
ConstructionState init_ac(group::SamplingFunction f0, double eps, transform::FiniteVector u,
                          double t);

// Appends stage k: embeds f_{k-1} one chain level deeper, opens all gaps
// within eps_k = min(eps/2^k, beta_k/(3 2^k)), and verifies the stage
// invariants before returning.
void cantor_stage(ConstructionState& st, const BuilderOptions& opts = {});

// cantor_stage plus the density-distance bound: the opening budget is
// halved until the consecutive L^t distance drops below 2^{-k}.
void ac_stage(ConstructionState& st, const BuilderOptions& opts = {});

ConstructionState build_cantor(group::SamplingFunction f0, double eps, int K,
                               const BuilderOptions& opts = {});
ConstructionState build_ac(group::SamplingFunction f0, double eps, transform::FiniteVector u,
                           double t, int K, const BuilderOptions& opts = {});

struct PersistenceViolation {
  int stage = 0;
  std::size_t gap_index = 0;
  double center = 0.0, half_width = 0.0;
};
struct PersistenceReport {
  bool pass = true;
  std::vector<PersistenceViolation> violations;
};

// Middle thirds of every recorded open gap must avoid the final spectrum.
PersistenceReport gap_persistence_check(const ConstructionState& st);

struct AuditReport {
  bool pass = true;
  std::vector<std::string> failures;
};

// The per-stage numbers the audit needs; serializable, so logs written to
// disk can be re-audited without the construction objects.
struct StageAuditEntry {
  int k = 0;
  double s_norm = 0.0;
  std::vector<double> gap_lengths;
  bool any_closed = false;
  double density_distance = std::numeric_limits<double>::quiet_NaN();
};

AuditReport audit_records(double eps, bool ac_mode, const std::vector<StageAuditEntry>& entries);

// Recheck of the stage inequalities from the stored records alone, plus the
// telescoping bound between stage functions.
AuditReport audit(const ConstructionState& st);

// --------------------------------------------------------------------------
// Gordon potentials

struct GordonStage {
  int k = 0;
  std::int64_t j = 0;  // period of the stage approximant
  std::int64_t q = 0;  // j * k
  std::string budget;        // (1/2)(jk)^{-jk}
  std::string s_norm;        // perturbation added at level k+1
  std::string approx_error;  // ||f - periodize_k(f)||
  std::string deviation;     // max_{1<=n<=q} |V(n) - V(n +- q)|
  std::string threshold;     // k^{-q}
  unsigned precision_bits = 0;
  bool budget_ok = false;
  bool gordon_ok = false;
};

struct GordonCertificate {
  std::vector<GordonStage> stages;
  std::int64_t window_lo = 0, window_hi = 0;  // [lo, hi) covered by the check
  unsigned precision_bits = 0;
  bool pass = false;
};

struct GordonBuild {
  precise::PreciseSampling final_f;
  std::vector<precise::PreciseSampling> approximants;  // f_{j_k}, k = 1..K
  GordonCertificate certificate;
};

// Mantissa bits needed to resolve the stage-K perturbation against O(1)
// potential values.
unsigned gordon_required_bits(const group::GroupChain& chain, int K);

// Builds a potential sharing its level-k periodization to within
// (1/2)(j_k k)^{-j_k k} for every k <= K, by mean-zero one-level-finer
// perturbations of half that size, then certifies the Gordon condition.
GordonBuild build_gordon(const group::GroupChain& chain, int K,
                         const group::SamplingFunction& f0, unsigned precision_bits = 0);

// Direct check of the Gordon inequality for a potential window.  The
// window must cover n in [1 - q_K, 2 q_K].
GordonCertificate check_gordon(const std::vector<precise::BigReal>& window, std::int64_t n0,
                               const std::vector<std::int64_t>& qs, unsigned precision_bits);
GordonCertificate check_gordon(const std::vector<double>& window, std::int64_t n0,
                               const std::vector<std::int64_t>& qs);

struct GrowthReport {
  double min_ratio = std::numeric_limits<double>::infinity();
  double argmin_energy = 0.0;
  bool pass = false;  // min_ratio >= 0.5 - 1e-12
};

// For an exactly q-periodic potential: max(||T_{-q} v||, ||T_q v||,
// ||T_{2q} v||) >= 1/2 at every grid energy, everything reduced to a single
// period map by Cayley-Hamilton (T_{2q} = tr(T_q) T_q - I and T_{-q} =
// tr(T_q) I - T_q for det = 1).  The forward pair alone does not obey the
// 1/2 bound: near a Dirichlet-type energy T_q (1,0)^T can be a contracting
// eigenvector.  v defaults to the solution data (1, 0).
GrowthReport gordon_growth_check(const group::Potential& v, std::span<const double> energy_grid,
                                 const std::vector<std::array<double, 2>>& initial_vectors = {
                                     {1.0, 0.0}});

}  // namespace flq::builders
