#include "bbopt/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bbopt {

namespace {

void check_finite(std::span<const double> xs, const char* what) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i])) throw NumericError(std::string(what) + ": non-finite component " + std::to_string(i));
}

void check_lengths(const AdamState& state, std::span<const double> theta, std::span<const double> g_hat) {
  if (theta.size() != g_hat.size() || state.dim() != theta.size())
    throw std::invalid_argument("update: dimension mismatch");
}

void check_coefficient(double x, const char* name) {
  if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0,1)");
}

// Folds one gradient sample into the momentum estimate.
void update_first_moment(AdamState& s, std::span<const double> g_hat, double beta_t) {
  s.weight_mass_m = beta_t * s.weight_mass_m + (1.0 - beta_t);
  const double gain = (1.0 - beta_t) / s.weight_mass_m;
  for (std::size_t i = 0; i < g_hat.size(); ++i) {
    s.m[i] = beta_t * s.m[i] + (1.0 - beta_t) * g_hat[i];
    s.m_hat[i] += gain * (g_hat[i] - s.m_hat[i]);
  }
}

}  // namespace

UpdateRule parse_update_rule(std::string_view name) {
  if (name == "sgd") return UpdateRule::sgd;
  if (name == "momentum") return UpdateRule::momentum;
  if (name == "adam") return UpdateRule::adam;
  throw std::invalid_argument("unknown update rule: " + std::string(name));
}

std::string_view to_string(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::sgd: return "sgd";
    case UpdateRule::momentum: return "momentum";
    case UpdateRule::adam: return "adam";
  }
  return "?";
}

ParamVector sgd_step(std::span<const double> theta, std::span<const double> g_hat, double a_t) {
  if (theta.size() != g_hat.size()) throw std::invalid_argument("sgd_step: dimension mismatch");
  check_finite(g_hat, "sgd_step gradient");
  ParamVector out(theta.begin(), theta.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= a_t * g_hat[i];
  return out;
}

ParamVector adam_step(AdamState& state, std::span<const double> theta, std::span<const double> g_hat, double a_t,
                      double beta_t, double gamma_t, double delta) {
  check_lengths(state, theta, g_hat);
  check_finite(g_hat, "adam_step gradient");
  check_finite(theta, "adam_step theta");
  check_coefficient(beta_t, "beta_t");
  check_coefficient(gamma_t, "gamma_t");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");

  update_first_moment(state, g_hat, beta_t);

  state.weight_mass_v = gamma_t * state.weight_mass_v + (1.0 - gamma_t);
  const double gain = (1.0 - gamma_t) / state.weight_mass_v;
  for (std::size_t i = 0; i < g_hat.size(); ++i) {
    const double sq = g_hat[i] * g_hat[i];
    state.v[i] = gamma_t * state.v[i] + (1.0 - gamma_t) * sq;
    state.v_hat[i] += gain * (sq - state.v_hat[i]);
  }
  ++state.t;

  ParamVector out(theta.begin(), theta.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (state.v_hat[i] < 0.0) throw InvariantError("adam_step: negative second moment at component " + std::to_string(i));
    out[i] -= a_t * state.m_hat[i] / (std::sqrt(state.v_hat[i]) + delta);
  }
  check_finite(out, "adam_step result");
  return out;
}

ParamVector momentum_step(AdamState& state, std::span<const double> theta, std::span<const double> g_hat,
                          double a_t, double beta_t) {
  check_lengths(state, theta, g_hat);
  check_finite(g_hat, "momentum_step gradient");
  check_coefficient(beta_t, "beta_t");

  update_first_moment(state, g_hat, beta_t);
  ++state.t;

  ParamVector out(theta.begin(), theta.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= a_t * state.m_hat[i];
  check_finite(out, "momentum_step result");
  return out;
}

Trajectory run_optimization(const Objective& objective, const Objective& monitor, const OptimizerConfig& cfg,
                            ParamVector initial_theta) {
  cfg.schedules.check();
  if (initial_theta.empty()) throw std::invalid_argument("run_optimization: empty parameter vector");

  Trajectory traj;
  traj.initial_theta = initial_theta;
  traj.initial_loss = monitor(initial_theta);

  const std::size_t cost = evaluations_per_update(cfg.estimator, initial_theta.size());
  if (cost == 0) throw std::invalid_argument("run_optimization: estimator has zero cost");

  Rng rng = make_stream(cfg.seed, 0);
  AdamState state(initial_theta.size());
  ParamVector theta = std::move(initial_theta);
  std::size_t used = 0;

  for (std::size_t t = 1; used + cost <= cfg.budget; ++t) {
    const double a_t = cfg.schedules.learning_rate(t);
    const double c_t = cfg.schedules.perturbation(t);
    const double beta_t = cfg.rule == UpdateRule::sgd ? 0.0 : cfg.schedules.momentum(t);

    GradientEstimate est;
    try {
      est = averaged_gradient(objective, theta, c_t, cfg.estimator, rng);
    } catch (const ObjectiveError& e) {
      traj.failure = std::string("step ") + std::to_string(t) + ": " + e.what();
      return traj;
    }
    used += est.budget_cost(cfg.estimator.count_baseline);

    switch (cfg.rule) {
      case UpdateRule::sgd: theta = sgd_step(theta, est.g_hat, a_t); break;
      case UpdateRule::momentum: theta = momentum_step(state, theta, est.g_hat, a_t, beta_t); break;
      case UpdateRule::adam:
        theta = adam_step(state, theta, est.g_hat, a_t, beta_t, cfg.schedules.second_moment_decay(t),
                          cfg.schedules.delta);
        break;
    }
    if (cfg.clip_box)
      for (auto& x : theta) x = std::clamp(x, cfg.clip_box->low, cfg.clip_box->high);

    double loss;
    try {
      loss = monitor(theta);
    } catch (const std::exception& e) {
      traj.failure = std::string("monitor at step ") + std::to_string(t) + ": " + e.what();
      return traj;
    }
    traj.records.push_back({t, used, theta, loss, a_t, c_t, beta_t});
  }
  return traj;
}

}  // namespace bbopt
