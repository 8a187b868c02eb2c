#include "bbopt/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bbopt {

namespace {

// Every objective call goes through here so failures carry the probe index.
double probe(const Objective& f, std::span<const double> x, std::size_t index) {
  double value;
  try {
    value = f(x);
  } catch (const ObjectiveError&) {
    throw;
  } catch (const std::exception& e) {
    throw ObjectiveError(index, e.what());
  }
  if (!std::isfinite(value)) throw ObjectiveError(index, "non-finite objective value");
  return value;
}

void require_positive_c(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("perturbation size must be positive");
}

}  // namespace

EstimatorKind parse_estimator(std::string_view name) {
  if (name == "fdsa") return EstimatorKind::fdsa;
  if (name == "spsa") return EstimatorKind::spsa;
  if (name == "rsgf") return EstimatorKind::rsgf;
  throw std::invalid_argument("unknown estimator: " + std::string(name));
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::fdsa: return "fdsa";
    case EstimatorKind::spsa: return "spsa";
    case EstimatorKind::rsgf: return "rsgf";
  }
  return "?";
}

GradientEstimate fdsa_gradient(const Objective& f, std::span<const double> theta, double c) {
  require_positive_c(c);
  const std::size_t p = theta.size();
  GradientEstimate est{std::vector<double>(p), 2 * p, 0, c};
  std::vector<double> x(theta.begin(), theta.end());
  for (std::size_t i = 0; i < p; ++i) {
    x[i] = theta[i] + c;
    const double plus = probe(f, x, 2 * i);
    x[i] = theta[i] - c;
    const double minus = probe(f, x, 2 * i + 1);
    x[i] = theta[i];
    est.g_hat[i] = (plus - minus) / (2.0 * c);
  }
  return est;
}

GradientEstimate spsa_gradient_along(const Objective& f, std::span<const double> theta, double c,
                                     std::span<const double> delta) {
  require_positive_c(c);
  const std::size_t p = theta.size();
  if (delta.size() != p) throw std::invalid_argument("spsa: direction length mismatch");
  std::vector<double> plus_x(p), minus_x(p);
  for (std::size_t i = 0; i < p; ++i) {
    if (delta[i] != 1.0 && delta[i] != -1.0) throw InvariantError("spsa: direction entries must be +-1");
    plus_x[i] = theta[i] + c * delta[i];
    minus_x[i] = theta[i] - c * delta[i];
  }
  const double diff = (probe(f, plus_x, 0) - probe(f, minus_x, 1)) / (2.0 * c);
  GradientEstimate est{std::vector<double>(p), 2, 0, c};
  for (std::size_t i = 0; i < p; ++i) est.g_hat[i] = diff / delta[i];
  return est;
}

GradientEstimate spsa_gradient(const Objective& f, std::span<const double> theta, double c, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<double> delta(theta.size());
  for (auto& d : delta) d = coin(rng) ? 1.0 : -1.0;
  return spsa_gradient_along(f, theta, c, delta);
}

GradientEstimate rsgf_gradient_along(const Objective& f, std::span<const double> theta, double c,
                                     std::span<const double> u, std::optional<double> baseline) {
  require_positive_c(c);
  const std::size_t p = theta.size();
  if (u.size() != p) throw std::invalid_argument("rsgf: direction length mismatch");
  GradientEstimate est{std::vector<double>(p), 0, 0, c};
  if (!baseline) {
    baseline = probe(f, theta, 0);
    est.n_evaluations = 1;
    est.n_baseline_evaluations = 1;
  }
  std::vector<double> x(p);
  for (std::size_t i = 0; i < p; ++i) x[i] = theta[i] + c * u[i];
  const double slope = (probe(f, x, est.n_evaluations) - *baseline) / c;
  est.n_evaluations += 1;
  for (std::size_t i = 0; i < p; ++i) est.g_hat[i] = slope * u[i];
  return est;
}

GradientEstimate rsgf_gradient(const Objective& f, std::span<const double> theta, double c, Rng& rng,
                               std::optional<double> baseline) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(theta.size());
  for (auto& x : u) x = normal(rng);
  return rsgf_gradient_along(f, theta, c, u, baseline);
}

GradientEstimate averaged_gradient(const Objective& f, std::span<const double> theta, double c,
                                   const EstimatorConfig& cfg, Rng& rng) {
  if (cfg.n_samples == 0) throw std::invalid_argument("n_samples must be >= 1");
  const std::size_t p = theta.size();
  GradientEstimate total{std::vector<double>(p, 0.0), 0, 0, c};

  std::optional<double> baseline;
  if (cfg.kind == EstimatorKind::rsgf) {
    baseline = probe(f, theta, 0);
    total.n_evaluations = 1;
    total.n_baseline_evaluations = 1;
  }

  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    GradientEstimate one;
    try {
      switch (cfg.kind) {
        case EstimatorKind::fdsa: one = fdsa_gradient(f, theta, c); break;
        case EstimatorKind::spsa: one = spsa_gradient(f, theta, c, rng); break;
        case EstimatorKind::rsgf: one = rsgf_gradient(f, theta, c, rng, baseline); break;
      }
    } catch (const ObjectiveError& e) {
      throw ObjectiveError(total.n_evaluations + e.probe(), e.reason());
    }
    for (std::size_t i = 0; i < p; ++i) total.g_hat[i] += one.g_hat[i];
    total.n_evaluations += one.n_evaluations;
    total.n_baseline_evaluations += one.n_baseline_evaluations;
  }
  if (cfg.n_samples > 1) {
    const double inv = 1.0 / static_cast<double>(cfg.n_samples);
    for (auto& g : total.g_hat) g *= inv;
  }
  return total;
}

std::size_t evaluations_per_update(const EstimatorConfig& cfg, std::size_t dim) {
  switch (cfg.kind) {
    case EstimatorKind::fdsa: return 2 * dim * cfg.n_samples;
    case EstimatorKind::spsa: return 2 * cfg.n_samples;
    case EstimatorKind::rsgf: return cfg.n_samples + (cfg.count_baseline ? 1 : 0);
  }
  return 0;
}

}  // namespace bbopt
