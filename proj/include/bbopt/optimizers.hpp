#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbopt/common.hpp"
#include "bbopt/estimators.hpp"
#include "bbopt/schedules.hpp"

namespace bbopt {

enum class UpdateRule { sgd, momentum, adam };

UpdateRule parse_update_rule(std::string_view name);
std::string_view to_string(UpdateRule rule);

/// Moment estimates for the momentum and adaptive update rules.
///
/// m and v are the raw exponential moving averages. weight_mass_m is the
/// total weight the EMA has assigned to gradient samples so far
/// (W_t = beta_t W_{t-1} + 1 - beta_t, W_0 = 0), so m_hat = m / W is a proper
/// weighted average of the observed gradients. m_hat and v_hat are kept
/// in normalized form directly; a constant gradient stream then reproduces
/// the constant bit for bit.
struct AdamState {
  std::vector<double> m, v;
  std::vector<double> m_hat, v_hat;
  std::size_t t = 0;
  double weight_mass_m = 0.0;
  double weight_mass_v = 0.0;

  AdamState() = default;
  explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0), m_hat(dim, 0.0), v_hat(dim, 0.0) {}

  std::size_t dim() const { return m.size(); }
};

struct Box {
  double low;
  double high;
};

/// theta - a_t * g_hat. Throws NumericError naming the first non-finite component.
ParamVector sgd_step(std::span<const double> theta, std::span<const double> g_hat, double a_t);

/// Adaptive-moment update with time-varying momentum coefficient beta_t and
/// second-moment decay gamma_t. Advances state.t and returns the new theta.
ParamVector adam_step(AdamState& state, std::span<const double> theta, std::span<const double> g_hat, double a_t,
                      double beta_t, double gamma_t, double delta);

/// As adam_step with the adaptive denominator fixed at 1: theta - a_t * m_hat.
ParamVector momentum_step(AdamState& state, std::span<const double> theta, std::span<const double> g_hat,
                          double a_t, double beta_t);

struct OptimizerConfig {
  UpdateRule rule = UpdateRule::adam;
  EstimatorConfig estimator;
  ScheduleSet schedules;
  std::size_t budget = 480;
  std::uint64_t seed = 0;
  std::optional<Box> clip_box;
};

struct IterationRecord {
  std::size_t t = 0;
  std::size_t n_evals = 0;  // cumulative budget cost after this update
  ParamVector theta;        // parameters after this update
  double loss = 0.0;        // monitor loss at theta
  double a_t = 0.0;
  double c_t = 0.0;
  double beta_t = 0.0;
};

struct Trajectory {
  ParamVector initial_theta;
  double initial_loss = 0.0;
  std::vector<IterationRecord> records;
  std::optional<std::string> failure;

  const ParamVector& final_theta() const { return records.empty() ? initial_theta : records.back().theta; }
  double final_loss() const { return records.empty() ? initial_loss : records.back().loss; }
};

/// Runs estimate/update iterations until the next update would exceed the
/// evaluation budget. The monitor is called once on the initial point and
/// after every update to fill in the loss column; it is not charged against
/// the budget. Pass the objective itself as monitor to record noisy losses.
///
/// Objective failures stop the run; the partial trajectory is returned with
/// `failure` set.
Trajectory run_optimization(const Objective& objective, const Objective& monitor, const OptimizerConfig& cfg,
                            ParamVector initial_theta);

}  // namespace bbopt
