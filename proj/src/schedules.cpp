#include "bbopt/schedules.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bbopt {

namespace {

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

double power_law_value(double coeff, double exponent, std::size_t t) {
  if (t == 0) throw std::invalid_argument("power_law_value: step index starts at 1");
  if (!(coeff > 0.0)) throw std::invalid_argument("power_law_value: coefficient must be positive");
  return coeff / std::pow(static_cast<double>(t), exponent);
}

void ScheduleSet::check() const {
  if (!(a0 > 0.0)) throw std::invalid_argument("schedules: a0 must be > 0");
  if (!(c0 > 0.0)) throw std::invalid_argument("schedules: c0 must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("schedules: delta must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("schedules: alpha must be > 0");
  if (!(zeta >= 0.0)) throw std::invalid_argument("schedules: zeta must be >= 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("schedules: lambda must be >= 0");
  if (!(beta0 >= 0.0 && beta0 < 1.0)) throw std::invalid_argument("schedules: beta0 must be in [0,1)");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("schedules: gamma must be in [0,1)");
  if (truncation_step && *truncation_step == 0)
    throw std::invalid_argument("schedules: truncation_step must be positive");
}

double ScheduleSet::momentum(std::size_t t) const {
  if (t == 0) throw std::invalid_argument("momentum: step index starts at 1");
  if (truncation_step && t > *truncation_step) return 0.0;
  if (beta0 == 0.0) return 0.0;
  return power_law_value(beta0, lambda, t);
}

double ScheduleSet::second_moment_decay(std::size_t t) const {
  if (t == 0) throw std::invalid_argument("second_moment_decay: step index starts at 1");
  return gamma;
}

bool ValidationReport::all_passed() const {
  for (const auto& c : conditions)
    if (!c.passed) return false;
  return true;
}

const ConditionResult& ValidationReport::at(std::string_view name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw std::out_of_range("no condition named " + std::string(name));
}

ValidationReport validate_schedules(const ScheduleSet& s) {
  ValidationReport report;

  report.conditions.push_back(
      {"A1-divergence", s.alpha <= 1.0, "alpha = " + fmt_num(s.alpha) + (s.alpha <= 1.0 ? " <= 1" : " > 1")});

  const double kc = s.alpha - s.zeta;
  report.conditions.push_back({"KC", kc > 0.5,
                               "alpha - zeta = " + fmt_num(s.alpha) + " - " + fmt_num(s.zeta) + " = " +
                                   fmt_num(kc) + (kc > 0.5 ? " > 0.5" : " <= 0.5")});

  const double ad = s.alpha + s.zeta;
  report.conditions.push_back({"adaptive-divergence", ad <= 1.0,
                               "alpha + zeta = " + fmt_num(s.alpha) + " + " + fmt_num(s.zeta) + " = " +
                                   fmt_num(ad) + (ad <= 1.0 ? " <= 1" : " > 1")});

  const double mom = s.lambda + s.alpha - s.zeta;
  const bool decay_ok = s.lambda > 0.0 && mom > 1.0;
  std::string expr = "lambda = " + fmt_num(s.lambda) + (s.lambda > 0.0 ? " > 0" : " <= 0") +
                     ", lambda + alpha - zeta = " + fmt_num(mom) + (mom > 1.0 ? " > 1" : " <= 1");
  if (s.truncation_step) expr += ", truncated at M = " + std::to_string(*s.truncation_step);
  report.conditions.push_back({"momentum", decay_ok || s.truncation_step.has_value(), expr});

  return report;
}

}  // namespace bbopt
