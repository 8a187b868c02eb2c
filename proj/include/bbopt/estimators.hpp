#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bbopt/common.hpp"

namespace bbopt {

enum class EstimatorKind { fdsa, spsa, rsgf };

EstimatorKind parse_estimator(std::string_view name);
std::string_view to_string(EstimatorKind kind);

/// An estimated gradient and the objective calls it consumed.
struct GradientEstimate {
  std::vector<double> g_hat;
  /// Every objective call, including an RSGF baseline evaluation.
  std::size_t n_evaluations = 0;
  /// Of n_evaluations, how many were unperturbed baseline calls.
  std::size_t n_baseline_evaluations = 0;
  /// Perturbation size c used for this estimate.
  double perturbation = 0.0;

  /// Cost charged against an evaluation budget. Baseline calls are free
  /// unless count_baseline is set.
  std::size_t budget_cost(bool count_baseline) const {
    return count_baseline ? n_evaluations : n_evaluations - n_baseline_evaluations;
  }
};

/// Central differences along each coordinate: 2p objective calls.
GradientEstimate fdsa_gradient(const Objective& f, std::span<const double> theta, double c);

/// Two-sided estimate along a Rademacher direction drawn from rng.
GradientEstimate spsa_gradient(const Objective& f, std::span<const double> theta, double c, Rng& rng);

/// Two-sided estimate along a caller-supplied direction with entries +-1.
GradientEstimate spsa_gradient_along(const Objective& f, std::span<const double> theta, double c,
                                     std::span<const double> delta);

/// One-sided Gaussian-smoothing estimate along u ~ N(0, I) drawn from rng.
/// A cached baseline f(theta) is reused when supplied.
GradientEstimate rsgf_gradient(const Objective& f, std::span<const double> theta, double c, Rng& rng,
                               std::optional<double> baseline = std::nullopt);

GradientEstimate rsgf_gradient_along(const Objective& f, std::span<const double> theta, double c,
                                     std::span<const double> u, std::optional<double> baseline = std::nullopt);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::spsa;
  std::size_t n_samples = 1;
  /// Charge RSGF baseline calls against the budget.
  bool count_baseline = false;
};

/// Componentwise mean of n_samples independent estimates. For RSGF the
/// baseline f(theta) is evaluated once and shared by all samples.
GradientEstimate averaged_gradient(const Objective& f, std::span<const double> theta, double c,
                                   const EstimatorConfig& cfg, Rng& rng);

/// Budget cost of one averaged_gradient call in dimension dim.
std::size_t evaluations_per_update(const EstimatorConfig& cfg, std::size_t dim);

}  // namespace bbopt
