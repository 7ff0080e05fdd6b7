#pragma once

#include <stdexcept>
#include <string>

namespace flq {

// Input failed validation (bad chain, wrong level, out-of-range option).
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numeric procedure did not reach its target accuracy even after
// escalation (extended precision, refinement limits).
class escalation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adaptive quadrature stopped before meeting its tolerance.
class quadrature_error : public escalation_error {
 public:
  quadrature_error(const std::string& what, double achieved)
      : escalation_error(what), achieved_error(achieved) {}
  double achieved_error;
};

}  // namespace flq
