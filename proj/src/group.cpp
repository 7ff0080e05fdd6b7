#include "flq/group.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flq::group {

namespace {

std::int64_t mod(std::int64_t a, std::int64_t p) {
  std::int64_t r = a % p;
  return r < 0 ? r + p : r;
}

void require_same_chain(const GroupChain& a, const GroupChain& b) {
  if (!(a == b)) throw validation_error("group elements live on different chains");
}

}  // namespace

GroupChain::GroupChain(std::vector<std::int64_t> periods) : periods_(std::move(periods)) {
  if (periods_.empty()) throw validation_error("chain needs at least one level");
  for (std::size_t k = 0; k < periods_.size(); ++k) {
    if (periods_[k] < 1)
      throw validation_error("chain period at level " + std::to_string(k + 1) +
                             " must be >= 1");
    if (k > 0 && periods_[k] % periods_[k - 1] != 0)
      throw validation_error(std::to_string(periods_[k]) + " not divisible by " +
                             std::to_string(periods_[k - 1]) + " at level " +
                             std::to_string(k + 1));
  }
}

std::int64_t GroupChain::period(int level) const {
  if (level < 1 || level > depth())
    throw validation_error("level " + std::to_string(level) + " outside chain of depth " +
                           std::to_string(depth()));
  return periods_[static_cast<std::size_t>(level - 1)];
}

GroupChain make_chain(std::vector<std::int64_t> periods) {
  return GroupChain(std::move(periods));
}

GroupElement make_element(const GroupChain& chain, std::vector<std::int64_t> residues) {
  if (static_cast<int>(residues.size()) != chain.depth())
    throw validation_error("residue vector length does not match chain depth");
  for (int k = 1; k <= chain.depth(); ++k) {
    auto& r = residues[static_cast<std::size_t>(k - 1)];
    r = mod(r, chain.period(k));
    if (k > 1 && r % chain.period(k - 1) != residues[static_cast<std::size_t>(k - 2)])
      throw validation_error("residues incompatible between levels " + std::to_string(k - 1) +
                             " and " + std::to_string(k));
  }
  return GroupElement{chain, std::move(residues)};
}

GroupElement identity(const GroupChain& chain) {
  return GroupElement{chain, std::vector<std::int64_t>(static_cast<std::size_t>(chain.depth()), 0)};
}

GroupElement adding_machine(const GroupChain& chain) {
  std::vector<std::int64_t> r(static_cast<std::size_t>(chain.depth()));
  for (int k = 1; k <= chain.depth(); ++k)
    r[static_cast<std::size_t>(k - 1)] = chain.period(k) == 1 ? 0 : 1;
  return GroupElement{chain, std::move(r)};
}

GroupElement translate(const GroupElement& w, const GroupElement& alpha, std::int64_t n) {
  require_same_chain(w.chain, alpha.chain);
  GroupElement out = w;
  for (std::size_t k = 0; k < out.residues.size(); ++k) {
    std::int64_t p = w.chain.periods()[k];
    out.residues[k] = mod(out.residues[k] + mod(n, p) * alpha.residues[k], p);
  }
  return out;
}

bool is_minimal(const GroupChain& chain, const GroupElement& alpha) {
  require_same_chain(chain, alpha.chain);
  for (int k = 1; k <= chain.depth(); ++k) {
    std::int64_t p = chain.period(k);
    if (p == 1) continue;
    if (std::gcd(alpha.residues[static_cast<std::size_t>(k - 1)], p) != 1) return false;
  }
  return true;
}

SamplingFunction::SamplingFunction(GroupChain chain, int level, std::vector<double> values)
    : chain_(std::move(chain)), level_(level), values_(std::move(values)) {
  std::int64_t p = chain_.period(level_);
  if (static_cast<std::int64_t>(values_.size()) != p)
    throw validation_error("sampling function at level " + std::to_string(level_) +
                           " needs " + std::to_string(p) + " values, got " +
                           std::to_string(values_.size()));
}

double SamplingFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SamplingFunction SamplingFunction::embed(int target_level) const {
  if (target_level < level_)
    throw validation_error("embed goes to a finer level; use periodize to coarsen");
  std::int64_t pk = period();
  std::int64_t pm = chain_.period(target_level);
  std::vector<double> out(static_cast<std::size_t>(pm));
  for (std::int64_t r = 0; r < pm; ++r)
    out[static_cast<std::size_t>(r)] = values_[static_cast<std::size_t>(r % pk)];
  return SamplingFunction(chain_, target_level, std::move(out));
}

SamplingFunction SamplingFunction::scaled(double lambda) const {
  std::vector<double> out = values_;
  for (double& v : out) v *= lambda;
  return SamplingFunction(chain_, level_, std::move(out));
}

SamplingFunction SamplingFunction::with_value(std::int64_t index, double value) const {
  std::vector<double> out = values_;
  out.at(static_cast<std::size_t>(index)) = value;
  return SamplingFunction(chain_, level_, std::move(out));
}

SamplingFunction scale(const SamplingFunction& f, double lambda) { return f.scaled(lambda); }

SamplingFunction periodize(const SamplingFunction& f, int target_level) {
  if (target_level > f.level())
    throw validation_error("periodize target level must not exceed the function level");
  std::int64_t pk = f.chain().period(target_level);
  std::int64_t pm = f.period();
  std::int64_t reps = pm / pk;
  std::vector<double> out(static_cast<std::size_t>(pk), 0.0);
  for (std::int64_t r = 0; r < pk; ++r) {
    double acc = 0.0;
    for (std::int64_t j = 0; j < reps; ++j)
      acc += f.values()[static_cast<std::size_t>(r + j * pk)];
    out[static_cast<std::size_t>(r)] = acc / static_cast<double>(reps);
  }
  return SamplingFunction(f.chain(), target_level, std::move(out));
}

double Potential::at(std::int64_t n) const {
  std::int64_t r = n % period;
  if (r < 0) r += period;
  return values[static_cast<std::size_t>(r)];
}

double Potential::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

Potential make_potential(std::vector<double> values, std::string provenance) {
  if (values.empty()) throw validation_error("potential needs at least one value");
  Potential p;
  p.period = static_cast<std::int64_t>(values.size());
  p.values = std::move(values);
  p.provenance = std::move(provenance);
  return p;
}

Potential sample_potential(const SamplingFunction& f, const GroupElement& w,
                           const GroupElement& alpha) {
  require_same_chain(f.chain(), w.chain);
  require_same_chain(f.chain(), alpha.chain);
  if (!is_minimal(f.chain(), alpha))
    throw validation_error("translation is not minimal on this chain");
  std::int64_t p = f.period();
  std::size_t k = static_cast<std::size_t>(f.level() - 1);
  std::int64_t r0 = w.residues[k];
  std::int64_t a = alpha.residues[k];
  std::vector<double> vals(static_cast<std::size_t>(p));
  for (std::int64_t n = 0; n < p; ++n)
    vals[static_cast<std::size_t>(n)] =
        f.values()[static_cast<std::size_t>((r0 + n * a) % p)];
  Potential out = make_potential(std::move(vals));
  out.provenance = "f level " + std::to_string(f.level()) + ", omega r=" + std::to_string(r0) +
                   ", alpha a=" + std::to_string(a);
  return out;
}

std::vector<double> sample_window(const SamplingFunction& f, const GroupElement& w,
                                  const GroupElement& alpha, std::int64_t n0,
                                  std::int64_t n1) {
  if (n1 < n0) throw validation_error("window end before start");
  Potential v = sample_potential(f, w, alpha);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n1 - n0));
  for (std::int64_t n = n0; n < n1; ++n) out.push_back(v.at(n));
  return out;
}

std::vector<Potential> hull_points(const SamplingFunction& f, const GroupElement& alpha) {
  std::int64_t p = f.period();
  std::vector<Potential> out;
  out.reserve(static_cast<std::size_t>(p));
  for (std::int64_t r = 0; r < p; ++r) {
    std::vector<std::int64_t> residues(static_cast<std::size_t>(f.chain().depth()));
    for (int k = 1; k <= f.chain().depth(); ++k)
      residues[static_cast<std::size_t>(k - 1)] = r % f.chain().period(k);
    // Residue towers of the form (r mod p_1, ..., r mod p_K) are always
    // compatible, so this cannot throw.
    GroupElement w = make_element(f.chain(), std::move(residues));
    out.push_back(sample_potential(f, w, alpha));
  }
  return out;
}

}  // namespace flq::group
