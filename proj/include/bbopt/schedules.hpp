#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bbopt {

/// coeff / t^exponent. Throws std::invalid_argument for t == 0 or coeff <= 0.
double power_law_value(double coeff, double exponent, std::size_t t);

/// Annealing coefficients for learning rate, perturbation size and momentum.
///
/// Step indices start at 1. The second-moment decay is a constant; the
/// per-step accessor exists so update rules can be written against a
/// general sequence.
struct ScheduleSet {
  double a0 = 0.032;
  double alpha = 0.602;
  double c0 = 0.016;
  double zeta = 0.101;
  double beta0 = 0.999;
  double lambda = 0.4;
  double gamma = 0.999;
  double delta = 1e-8;
  /// Momentum is switched off (beta_t = 0) for t > truncation_step.
  std::optional<std::size_t> truncation_step;

  /// Structural checks; throws std::invalid_argument.
  void check() const;

  double learning_rate(std::size_t t) const { return power_law_value(a0, alpha, t); }
  double perturbation(std::size_t t) const { return power_law_value(c0, zeta, t); }
  double momentum(std::size_t t) const;
  double second_moment_decay(std::size_t t) const;
};

struct ConditionResult {
  std::string name;
  bool passed = false;
  std::string inequality;  // evaluated, e.g. "0.602 - 0.101 = 0.501 > 0.5"
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;

  bool all_passed() const;
  /// Throws std::out_of_range for unknown names.
  const ConditionResult& at(std::string_view name) const;
};

/// Checks the sufficient conditions for asymptotic convergence. Advisory:
/// always returns a report, never throws.
///
/// Conditions, by name:
///   "A1-divergence"        alpha <= 1 (sum of a_t diverges)
///   "KC"                   alpha - zeta > 0.5
///   "adaptive-divergence"  alpha + zeta <= 1 (sum of a_t * c_t diverges)
///   "momentum"             (lambda > 0 and lambda + alpha - zeta > 1) or truncation
ValidationReport validate_schedules(const ScheduleSet& s);

}  // namespace bbopt
