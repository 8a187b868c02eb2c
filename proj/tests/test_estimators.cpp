#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bbopt/estimators.hpp"
#include "bbopt/objectives.hpp"

using namespace bbopt;

namespace {

double quad(std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }
double constant7(std::span<const double>) { return 7.0; }
double cube1(std::span<const double> x) { return x[0] * x[0] * x[0]; }

struct Counter {
  std::size_t calls = 0;
  Objective wrap(Objective f) {
    return [this, f](std::span<const double> x) {
      ++calls;
      return f(x);
    };
  }
};

}  // namespace

TEST(Fdsa, ExactOnQuadratic) {
  const std::vector<double> th = {1.0, 0.0};
  const auto g = fdsa_gradient(quad, th, 0.1);
  EXPECT_NEAR(g.g_hat[0], 2.0, 1e-12);
  EXPECT_NEAR(g.g_hat[1], 0.0, 1e-12);
  EXPECT_EQ(g.n_evaluations, 4u);
  EXPECT_EQ(g.perturbation, 0.1);
}

TEST(Fdsa, ConstantGivesZero) {
  const std::vector<double> th = {0.3, -2.0, 5.0};
  for (double v : fdsa_gradient(constant7, th, 0.05).g_hat) EXPECT_EQ(v, 0.0);
}

TEST(Fdsa, CubicBias) {
  const std::vector<double> th = {1.0};
  EXPECT_NEAR(fdsa_gradient(cube1, th, 0.1).g_hat[0], 3.01, 1e-12);
  EXPECT_NEAR(fdsa_gradient(cube1, th, 0.05).g_hat[0], 3.0025, 1e-12);
}

TEST(Fdsa, CountIsTwoP) {
  Counter c;
  const std::vector<double> th(7, 0.1);
  const auto g = fdsa_gradient(c.wrap(quad), th, 0.01);
  EXPECT_EQ(g.n_evaluations, 14u);
  EXPECT_EQ(c.calls, 14u);
}

TEST(Spsa, HandWorkedDirections) {
  const std::vector<double> th = {1.0, 0.0};
  const std::vector<double> pp = {1.0, 1.0}, pm = {1.0, -1.0};
  const auto a = spsa_gradient_along(quad, th, 0.1, pp);
  const auto b = spsa_gradient_along(quad, th, 0.1, pm);
  EXPECT_NEAR(a.g_hat[0], 2.0, 1e-12);
  EXPECT_NEAR(a.g_hat[1], 2.0, 1e-12);
  EXPECT_NEAR(b.g_hat[0], 2.0, 1e-12);
  EXPECT_NEAR(b.g_hat[1], -2.0, 1e-12);
  EXPECT_NEAR((a.g_hat[1] + b.g_hat[1]) / 2, 0.0, 1e-12);
  EXPECT_EQ(a.n_evaluations, 2u);
}

TEST(Spsa, RejectsNonRademacherDirection) {
  const std::vector<double> th = {1.0, 0.0};
  const std::vector<double> zero = {1.0, 0.0};
  EXPECT_THROW(spsa_gradient_along(quad, th, 0.1, zero), InvariantError);
}

TEST(Spsa, ConstantGivesZero) {
  Rng rng = make_stream(3);
  const std::vector<double> th = {0.3, -2.0, 5.0};
  for (double v : spsa_gradient(constant7, th, 0.05, rng).g_hat) EXPECT_EQ(v, 0.0);
}

TEST(Spsa, DrawsAreRademacher) {
  // On f = sum x_i the estimate is Delta_sum / Delta_i; with p = 1 it is 1.
  Rng rng = make_stream(11);
  const std::vector<double> th = {0.0};
  auto lin = [](std::span<const double> x) { return x[0]; };
  for (int k = 0; k < 100; ++k) EXPECT_NEAR(spsa_gradient(lin, th, 0.5, rng).g_hat[0], 1.0, 1e-12);
}

TEST(Spsa, MonteCarloMeanMatchesGradient) {
  Rng rng = make_stream(5);
  const std::vector<double> th = {1.0, 0.0};
  EstimatorConfig cfg;
  cfg.n_samples = 10000;
  const auto g = averaged_gradient(quad, th, 0.1, cfg, rng);
  EXPECT_NEAR(g.g_hat[0], 2.0, 0.05);
  EXPECT_NEAR(g.g_hat[1], 0.0, 0.05);
  EXPECT_EQ(g.n_evaluations, 20000u);
}

TEST(Spsa, Deterministic) {
  const std::vector<double> th = {0.2, 0.4, -0.1};
  auto f = [](std::span<const double> x) { return x[0] * x[0] + 3 * x[1] - x[2] * x[1]; };
  Rng a = make_stream(42), b = make_stream(42);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(spsa_gradient(f, th, 0.1, a).g_hat, spsa_gradient(f, th, 0.1, b).g_hat);
}

TEST(Spsa, SingleSampleAverageIsIdentical) {
  const std::vector<double> th = {0.2, 0.4, -0.1};
  Rng a = make_stream(9), b = make_stream(9);
  EstimatorConfig cfg;
  for (int k = 0; k < 5; ++k) {
    const auto x = averaged_gradient(quad, th, 0.07, cfg, a);
    const auto y = spsa_gradient(quad, th, 0.07, b);
    EXPECT_EQ(x.g_hat, y.g_hat);
    EXPECT_EQ(x.n_evaluations, y.n_evaluations);
  }
}

TEST(Spsa, BiasOrderOnCubic) {
  // In one dimension Delta^2 = 1, so the expected bias is c^2 like FDSA.
  Rng rng = make_stream(1);
  const std::vector<double> th = {1.0};
  EstimatorConfig cfg;
  cfg.n_samples = 100000;
  const double b1 = averaged_gradient(cube1, th, 0.1, cfg, rng).g_hat[0] - 3.0;
  const double b2 = averaged_gradient(cube1, th, 0.05, cfg, rng).g_hat[0] - 3.0;
  EXPECT_GE(b1 / b2, 3.0);
  EXPECT_LE(b1 / b2, 5.0);
}

TEST(Rsgf, HandWorkedDirection) {
  const std::vector<double> th = {1.0, 0.0};
  const std::vector<double> u = {1.0, 0.0};
  const auto g = rsgf_gradient_along(quad, th, 0.1, u);
  EXPECT_NEAR(g.g_hat[0], 2.1, 1e-12);
  EXPECT_NEAR(g.g_hat[1], 0.0, 1e-12);
  EXPECT_EQ(g.n_evaluations, 2u);
  EXPECT_EQ(g.n_baseline_evaluations, 1u);
  const auto h = rsgf_gradient_along(quad, th, 0.1, u, 1.0);
  EXPECT_EQ(h.n_evaluations, 1u);
  EXPECT_EQ(h.n_baseline_evaluations, 0u);
  EXPECT_EQ(h.g_hat, g.g_hat);
}

TEST(Rsgf, ConstantGivesZero) {
  Rng rng = make_stream(3);
  const std::vector<double> th = {0.3, -2.0};
  for (double v : rsgf_gradient(constant7, th, 0.05, rng).g_hat) EXPECT_EQ(v, 0.0);
}

TEST(Rsgf, MonteCarloMeanMatchesGradient) {
  Rng rng = make_stream(8);
  const std::vector<double> th = {1.0, 0.0};
  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::rsgf;
  cfg.n_samples = 100000;
  const auto g = averaged_gradient(quad, th, 0.01, cfg, rng);
  EXPECT_NEAR(g.g_hat[0], 2.0, 0.05);
  EXPECT_NEAR(g.g_hat[1], 0.0, 0.05);
}

TEST(Rsgf, SharedBaselineAccounting) {
  Counter c;
  Rng rng = make_stream(2);
  const std::vector<double> th = {1.0, 0.0, 2.0};
  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::rsgf;
  cfg.n_samples = 2;
  const auto g = averaged_gradient(c.wrap(quad), th, 0.1, cfg, rng);
  EXPECT_EQ(c.calls, 3u);
  EXPECT_EQ(g.n_evaluations, 3u);
  EXPECT_EQ(g.budget_cost(false), 2u);
  EXPECT_EQ(g.budget_cost(true), 3u);
  EXPECT_EQ(evaluations_per_update(cfg, 3), 2u);
  cfg.count_baseline = true;
  EXPECT_EQ(evaluations_per_update(cfg, 3), 3u);
}

TEST(Accounting, PerUpdateCosts) {
  EstimatorConfig cfg;
  EXPECT_EQ(evaluations_per_update(cfg, 20), 2u);
  cfg.kind = EstimatorKind::fdsa;
  EXPECT_EQ(evaluations_per_update(cfg, 20), 40u);
  cfg.n_samples = 3;
  EXPECT_EQ(evaluations_per_update(cfg, 20), 120u);
}

TEST(Estimators, NoiseScalesAsInverseC) {
  // Additive noise sigma: estimate std ~ sigma / c.
  for (auto kind : {EstimatorKind::spsa, EstimatorKind::rsgf}) {
    const auto f = synthetic_objective(LossKind::sphere, 0.1, 17);
    const std::vector<double> th = {0.5, -0.5};
    auto component_std = [&](double c) {
      Rng rng = make_stream(23);
      const int n = 100000;
      double s = 0, s2 = 0;
      for (int k = 0; k < n; ++k) {
        const double g = kind == EstimatorKind::spsa ? spsa_gradient(f, th, c, rng).g_hat[0]
                                                     : rsgf_gradient(f, th, c, rng).g_hat[0];
        s += g;
        s2 += g * g;
      }
      const double m = s / n;
      return std::sqrt(s2 / n - m * m);
    };
    const double ratio = component_std(0.01) / component_std(0.02);
    EXPECT_GE(ratio, 1.7) << to_string(kind);
    EXPECT_LE(ratio, 2.3) << to_string(kind);
  }
}

TEST(Estimators, FailureCarriesProbeIndex) {
  int calls = 0;
  Objective f = [&](std::span<const double>) -> double {
    if (++calls == 3) throw std::runtime_error("instrument offline");
    return 1.0;
  };
  const std::vector<double> th = {0.0, 0.0};
  try {
    fdsa_gradient(f, th, 0.1);
    FAIL() << "expected ObjectiveError";
  } catch (const ObjectiveError& e) {
    EXPECT_EQ(e.probe(), 2u);
    EXPECT_EQ(e.reason(), "instrument offline");
  }
}

TEST(Estimators, NonFiniteValueIsFailure) {
  auto f = [](std::span<const double> x) { return x[0] > 0 ? std::nan("") : 0.0; };
  Rng rng = make_stream(0);
  const std::vector<double> th = {0.0};
  EXPECT_THROW(spsa_gradient(f, th, 0.1, rng), ObjectiveError);
}

TEST(Estimators, RejectsBadArguments) {
  Rng rng = make_stream(0);
  const std::vector<double> th = {0.0};
  EXPECT_THROW(spsa_gradient(quad, th, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(fdsa_gradient(quad, th, -1.0), std::invalid_argument);
  EstimatorConfig cfg;
  cfg.n_samples = 0;
  EXPECT_THROW(averaged_gradient(quad, th, 0.1, cfg, rng), std::invalid_argument);
  EXPECT_EQ(parse_estimator("rsgf"), EstimatorKind::rsgf);
  EXPECT_THROW(parse_estimator("adam"), std::invalid_argument);
}
