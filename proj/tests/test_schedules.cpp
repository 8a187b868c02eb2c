#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "bbopt/schedules.hpp"

using namespace bbopt;

TEST(PowerLaw, WorkedValues) {
  EXPECT_DOUBLE_EQ(power_law_value(0.032, 0.602, 1), 0.032);
  EXPECT_NEAR(power_law_value(0.032, 0.602, 2), 0.021083, 5e-7);
  EXPECT_NEAR(power_law_value(0.016, 0.101, 10), 0.012680, 5e-7);
}

TEST(PowerLaw, RejectsBadInput) {
  EXPECT_THROW(power_law_value(0.032, 0.602, 0), std::invalid_argument);
  EXPECT_THROW(power_law_value(0.0, 0.602, 3), std::invalid_argument);
  EXPECT_THROW(power_law_value(-1.0, 0.602, 3), std::invalid_argument);
}

TEST(PowerLaw, NonIncreasing) {
  for (double e : {0.0, 0.101, 0.602, 1.0}) {
    double prev = power_law_value(0.5, e, 1);
    EXPECT_EQ(prev, 0.5);
    for (std::size_t t = 2; t < 500; ++t) {
      const double v = power_law_value(0.5, e, t);
      EXPECT_LE(v, prev);
      prev = v;
    }
  }
}

TEST(ScheduleSet, DefaultsMatchBenchmarkSettings) {
  ScheduleSet s;
  EXPECT_DOUBLE_EQ(s.learning_rate(1), 0.032);
  EXPECT_DOUBLE_EQ(s.perturbation(1), 0.016);
  EXPECT_DOUBLE_EQ(s.momentum(1), 0.999);
  EXPECT_DOUBLE_EQ(s.second_moment_decay(1), 0.999);
  EXPECT_DOUBLE_EQ(s.second_moment_decay(1000), 0.999);
  EXPECT_NEAR(s.momentum(16), 0.999 / std::pow(16.0, 0.4), 1e-15);
}

TEST(ScheduleSet, Truncation) {
  ScheduleSet s;
  s.truncation_step = 3;
  EXPECT_GT(s.momentum(3), 0.0);
  EXPECT_EQ(s.momentum(4), 0.0);
  EXPECT_EQ(s.momentum(100), 0.0);
}

TEST(ScheduleSet, CheckRejects) {
  auto bad = [](auto mutate) {
    ScheduleSet s;
    mutate(s);
    return s;
  };
  EXPECT_THROW(bad([](ScheduleSet& s) { s.a0 = 0; }).check(), std::invalid_argument);
  EXPECT_THROW(bad([](ScheduleSet& s) { s.c0 = -1; }).check(), std::invalid_argument);
  EXPECT_THROW(bad([](ScheduleSet& s) { s.delta = 0; }).check(), std::invalid_argument);
  EXPECT_THROW(bad([](ScheduleSet& s) { s.beta0 = 1.0; }).check(), std::invalid_argument);
  EXPECT_THROW(bad([](ScheduleSet& s) { s.gamma = 1.0; }).check(), std::invalid_argument);
  EXPECT_NO_THROW(ScheduleSet{}.check());
}

TEST(Validator, AllPassWithLargerLambda) {
  ScheduleSet s;
  s.lambda = 0.502;
  const auto r = validate_schedules(s);
  EXPECT_TRUE(r.all_passed());
  EXPECT_EQ(r.conditions.size(), 4u);
}

TEST(Validator, BenchmarkLambdaFailsMomentumOnly) {
  ScheduleSet s;  // lambda = 0.4
  const auto r = validate_schedules(s);
  EXPECT_FALSE(r.at("momentum").passed);
  EXPECT_TRUE(r.at("A1-divergence").passed);
  EXPECT_TRUE(r.at("KC").passed);
  EXPECT_TRUE(r.at("adaptive-divergence").passed);
  EXPECT_NE(r.at("momentum").inequality.find("0.901"), std::string::npos);
}

TEST(Validator, TruncationRescuesMomentum) {
  ScheduleSet s;
  s.truncation_step = 50;
  EXPECT_TRUE(validate_schedules(s).all_passed());
}

TEST(Validator, ZeroLambdaFailsWithoutTruncation) {
  ScheduleSet s;
  s.lambda = 0.0;
  EXPECT_FALSE(validate_schedules(s).at("momentum").passed);
}

TEST(Validator, ExponentFailures) {
  ScheduleSet s;
  s.alpha = 1.2;
  EXPECT_FALSE(validate_schedules(s).at("A1-divergence").passed);
  s.alpha = 0.55;  // 0.55 - 0.101 < 0.5
  EXPECT_FALSE(validate_schedules(s).at("KC").passed);
  s.alpha = 0.95;  // 0.95 + 0.101 > 1
  EXPECT_FALSE(validate_schedules(s).at("adaptive-divergence").passed);
}

TEST(Validator, Pure) {
  ScheduleSet s;
  const auto a = validate_schedules(s), b = validate_schedules(s);
  ASSERT_EQ(a.conditions.size(), b.conditions.size());
  for (std::size_t i = 0; i < a.conditions.size(); ++i) {
    EXPECT_EQ(a.conditions[i].name, b.conditions[i].name);
    EXPECT_EQ(a.conditions[i].passed, b.conditions[i].passed);
    EXPECT_EQ(a.conditions[i].inequality, b.conditions[i].inequality);
  }
  EXPECT_THROW(a.at("nope"), std::out_of_range);
}
