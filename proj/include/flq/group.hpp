#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flq/errors.hpp"

namespace flq::group {

// Tower of cyclic quotients Z/p_1 <- Z/p_2 <- ... defining a procyclic
// Cantor group.  p_k must divide p_{k+1}.  Levels are 1-based.
class GroupChain {
 public:
  explicit GroupChain(std::vector<std::int64_t> periods);

  int depth() const { return static_cast<int>(periods_.size()); }
  std::int64_t period(int level) const;
  const std::vector<std::int64_t>& periods() const { return periods_; }

  bool operator==(const GroupChain&) const = default;

 private:
  std::vector<std::int64_t> periods_;
};

GroupChain make_chain(std::vector<std::int64_t> periods);

// Group element as a compatible residue vector, one residue per level.
struct GroupElement {
  GroupChain chain;
  std::vector<std::int64_t> residues;
};

GroupElement make_element(const GroupChain& chain, std::vector<std::int64_t> residues);
GroupElement identity(const GroupChain& chain);
// The adding-machine generator (1,1,...,1); minimal on every chain.
GroupElement adding_machine(const GroupChain& chain);

// w + n*alpha, residue-wise mod p_k.  n may be negative.
GroupElement translate(const GroupElement& w, const GroupElement& alpha, std::int64_t n);

// True iff alpha generates every finite quotient, i.e. gcd(a_k, p_k) = 1
// at each level; equivalent to density of every orbit.
bool is_minimal(const GroupChain& chain, const GroupElement& alpha);

// Real-valued function on Omega constant on cosets of Omega_k, stored as
// p_k values indexed by residue.
class SamplingFunction {
 public:
  SamplingFunction(GroupChain chain, int level, std::vector<double> values);

  const GroupChain& chain() const { return chain_; }
  int level() const { return level_; }
  std::int64_t period() const { return chain_.period(level_); }
  const std::vector<double>& values() const { return values_; }
  double sup_norm() const;

  // Same function viewed one or more levels deeper: the value block is
  // replicated p_m/p_k times.  Sup-norm is preserved.
  SamplingFunction embed(int target_level) const;
  SamplingFunction scaled(double lambda) const;
  SamplingFunction with_value(std::int64_t index, double value) const;

 private:
  GroupChain chain_;
  int level_;
  std::vector<double> values_;
};

SamplingFunction scale(const SamplingFunction& f, double lambda);

// Haar average over the finite subgroup Omega_k/Omega_m: the value at
// residue r is the mean of f over {r + j*p_k}.  Never increases sup-norm.
SamplingFunction periodize(const SamplingFunction& f, int target_level);

// Periodic potential V(n) = f(T^n w) together with where it came from.
struct Potential {
  std::int64_t period = 1;
  std::vector<double> values;  // V(n) = values[n mod period]
  std::string provenance;

  double at(std::int64_t n) const;
  double sup_norm() const;
};

Potential make_potential(std::vector<double> values, std::string provenance = {});

Potential sample_potential(const SamplingFunction& f, const GroupElement& w,
                           const GroupElement& alpha);

// Window V(n0), ..., V(n1-1) for inspection; n may be negative.
std::vector<double> sample_window(const SamplingFunction& f, const GroupElement& w,
                                  const GroupElement& alpha, std::int64_t n0,
                                  std::int64_t n1);

// The finitely many hull elements {V_w'} of a periodic sampling function:
// p_k sequences, not necessarily distinct.
std::vector<Potential> hull_points(const SamplingFunction& f, const GroupElement& alpha);

}  // namespace flq::group
