#include "bbopt/bench.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bbopt {

using nlohmann::json;

std::vector<double> AxisSpec::values() const {
  if (points == 0) throw std::invalid_argument("scan axis needs at least one point");
  if (!(low <= high)) throw std::invalid_argument("scan axis needs low <= high");
  std::vector<double> out(points, low);
  for (std::size_t i = 1; i < points; ++i)
    out[i] = low + (high - low) * static_cast<double>(i) / static_cast<double>(points - 1);
  return out;
}

ScanResult landscape_scan(const ScanSpec& spec, LossKind kind, ObjectiveConfig cfg, std::uint64_t seed) {
  if (cfg.active_dims.size() != 2) throw std::invalid_argument("landscape_scan needs exactly two active dims");
  if (spec.first.points * spec.second.points > spec.max_points)
    throw std::invalid_argument("scan grid of " + std::to_string(spec.first.points * spec.second.points) +
                                " points exceeds the cap of " + std::to_string(spec.max_points));
  cfg.shots = 0;
  cfg.rb.shots = 0;
  const Objective f = make_pulse_objective(kind, cfg, seed);

  ScanResult out{spec.first.values(), spec.second.values(), {}};
  for (double y : out.second_values) {
    std::vector<double> row;
    row.reserve(out.first_values.size());
    for (double x : out.first_values) {
      const double theta[2] = {x, y};
      row.push_back(f(theta));
    }
    out.loss.push_back(std::move(row));
  }
  return out;
}

std::string scan_csv(const ScanResult& scan) {
  char buf[32];
  std::string out = "second\\first";
  for (double x : scan.first_values) {
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    out += buf;
  }
  out += '\n';
  for (std::size_t i = 0; i < scan.second_values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", scan.second_values[i]);
    out += buf;
    for (double v : scan.loss[i]) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

AxisSpec axis_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(std::string("scan.") + name + " must be [low, high, points]");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<std::size_t>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scan.") + name + ": " + e.what());
  }
}

}  // namespace

ScanSpec scan_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scan: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "first" && it.key() != "second" && it.key() != "max_points")
      throw ConfigError("scan: unknown key '" + it.key() + "'");
  if (!j.contains("first") || !j.contains("second")) throw ConfigError("scan needs first and second axes");
  ScanSpec s;
  s.first = axis_from_json(j.at("first"), "first");
  s.second = axis_from_json(j.at("second"), "second");
  if (j.contains("max_points")) s.max_points = j.at("max_points").get<std::size_t>();
  return s;
}

AlgorithmSpec default_fine_algorithm(EstimatorKind kind) {
  AlgorithmSpec a = default_rough_algorithm(kind);
  a.name += "-fine";
  const double step = kind == EstimatorKind::rsgf ? 0.004 : 0.002;
  a.schedules.a0 = step;
  a.schedules.c0 = step;
  a.schedules.lambda = 0.1;
  return a;
}

AlgorithmSpec default_rough_algorithm(EstimatorKind kind) {
  AlgorithmSpec a;
  a.name = kind == EstimatorKind::rsgf ? "AdamRSGF" : kind == EstimatorKind::spsa ? "AdamSPSA" : "AdamFDSA";
  a.update_rule = UpdateRule::adam;
  a.estimator.kind = kind;
  a.estimator.n_samples = kind == EstimatorKind::rsgf ? 2 : 1;
  return a;
}

void TuneupConfig::check() const {
  objective.check();
  if (objective.active_dims.size() != 0 && objective.active_dims.size() != kPulseDim)
    throw std::invalid_argument("tuneup optimizes the full pulse; active_dims must be empty");
  rough.algorithm.schedules.check();
  fine.algorithm.schedules.check();
  if (rough_result && rough_result->size() != objective.dim())
    throw std::invalid_argument("rough_result has the wrong length");
  if (irb.n_sequences == 0) throw std::invalid_argument("irb needs at least one sequence");
}

std::size_t best_iterate(const Trajectory& traj) {
  std::size_t best = 0;
  double loss = traj.initial_loss;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    if (traj.records[i].loss < loss || std::isnan(loss)) {
      loss = traj.records[i].loss;
      best = i + 1;
    }
  }
  return best;
}

namespace {

constexpr std::uint64_t kFineSeedOffset = 0x100000000ull;

StageResult finish_stage(Trajectory traj, const ObjectiveConfig& cfg) {
  StageResult s;
  s.best_iteration = best_iterate(traj);
  s.best_theta = s.best_iteration == 0 ? traj.initial_theta : traj.records[s.best_iteration - 1].theta;
  s.best_loss = s.best_iteration == 0 ? traj.initial_loss : traj.records[s.best_iteration - 1].loss;
  s.best_fidelity = average_gate_fidelity(hann_gate(cfg.expand(s.best_theta), cfg), gates::x90());
  s.trajectory = std::move(traj);
  return s;
}

OptimizerConfig optimizer_for(const StageConfig& stage, std::uint64_t seed) {
  OptimizerConfig oc;
  oc.rule = stage.algorithm.update_rule;
  oc.estimator = stage.algorithm.estimator;
  oc.schedules = stage.algorithm.schedules;
  oc.budget = stage.budget;
  oc.seed = seed;
  return oc;
}

}  // namespace

TuneupResult two_stage_tuneup(const TuneupConfig& cfg) {
  cfg.check();
  TuneupResult out;
  ParamVector start(cfg.objective.dim(), 0.0);

  if (cfg.rough_result) {
    start = *cfg.rough_result;
  } else {
    try {
      // Each iterate is scored by one extra measurement on its own stream.
      Trajectory t = run_optimization(make_pulse_objective(LossKind::l_combined, cfg.objective, cfg.seed),
                                      make_pulse_objective(LossKind::l_combined, cfg.objective, cfg.seed, 3),
                                      optimizer_for(cfg.rough, cfg.seed), start);
      out.rough = finish_stage(std::move(t), cfg.objective);
    } catch (const std::exception& e) {
      out.failure = std::string("rough stage: ") + e.what();
      return out;
    }
    if (out.rough->trajectory.failure) {
      out.failure = "rough stage: " + *out.rough->trajectory.failure;
      return out;
    }
    start = out.rough->best_theta;
  }
  out.start_fidelity = average_gate_fidelity(hann_gate(cfg.objective.expand(start), cfg.objective), gates::x90());

  const std::uint64_t fine_seed = cfg.seed + kFineSeedOffset;
  try {
    Trajectory t = run_optimization(make_pulse_objective(LossKind::l_rb, cfg.objective, fine_seed),
                                    make_pulse_objective(LossKind::l_rb, cfg.objective, fine_seed, 3),
                                    optimizer_for(cfg.fine, fine_seed), start);
    out.fine = finish_stage(std::move(t), cfg.objective);
  } catch (const std::exception& e) {
    out.failure = std::string("fine stage: ") + e.what();
    return out;
  }
  // A failed fine stage still has a best iterate worth benchmarking.
  if (out.fine->trajectory.failure) out.failure = "fine stage: " + *out.fine->trajectory.failure;

  const Propagator gate = hann_gate(cfg.objective.expand(out.fine->best_theta), cfg.objective);
  out.direct_fidelity = average_gate_fidelity(gate, gates::x90());
  try {
    Rng rng = make_stream(cfg.seed, 4);
    RbSettings ref = cfg.irb;
    ref.interleaved = false;
    RbSettings inter = cfg.irb;
    inter.interleaved = true;
    out.reference_fit = fit_rb_decay(run_rb(gate, ref, rng));
    out.interleaved_fit = fit_rb_decay(run_rb(gate, inter, rng));
    const double pr = out.reference_fit->decay_rate, pi = out.interleaved_fit->decay_rate;
    const auto f = interleaved_gate_fidelity(pr, pi, out.interleaved_fit->decay_rate_se);
    out.irb_fidelity = f.fidelity;
    out.irb_warning = f.warning;
    const double rel = std::hypot(out.reference_fit->decay_rate_se / pr, out.interleaved_fit->decay_rate_se / pi);
    out.irb_fidelity_se = 0.5 * (pi / pr) * rel;
  } catch (const std::exception& e) {
    out.failure = std::string("interleaved RB: ") + e.what();
  }
  return out;
}

namespace {

StageConfig stage_from_json(const json& j, StageConfig base, const std::string& sec) {
  if (!j.is_object()) throw ConfigError(sec + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "update_rule" && k != "estimator" && k != "schedules" && k != "budget_evaluations" && k != "name")
      throw ConfigError(sec + ": unknown key '" + k + "'");
  }
  if (j.contains("name")) base.algorithm.name = j.at("name").get<std::string>();
  if (j.contains("update_rule")) {
    try {
      base.algorithm.update_rule = parse_update_rule(j.at("update_rule").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(sec + ": " + e.what());
    }
  }
  if (j.contains("estimator")) base.algorithm.estimator = estimator_from_json(j.at("estimator"), base.algorithm.estimator);
  if (j.contains("schedules")) base.algorithm.schedules = schedules_from_json(j.at("schedules"), base.algorithm.schedules);
  if (j.contains("budget_evaluations")) base.budget = j.at("budget_evaluations").get<std::size_t>();
  return base;
}

}  // namespace

TuneupConfig tuneup_from_json(const json& j, std::uint64_t seed) {
  const ExperimentConfig exp = experiment_from_json(j);
  TuneupConfig cfg;
  cfg.objective = exp.objective_cfg;
  cfg.objective.active_dims.clear();
  cfg.seed = seed;

  const json t = j.contains("tuneup") ? j.at("tuneup") : json::object();
  if (!t.is_object()) throw ConfigError("tuneup: expected an object");
  for (auto it = t.begin(); it != t.end(); ++it) {
    const auto& k = it.key();
    if (k != "estimator" && k != "rough" && k != "fine" && k != "rough_result" && k != "irb_sequences" &&
        k != "irb_shots")
      throw ConfigError("tuneup: unknown key '" + k + "'");
  }
  EstimatorKind kind = EstimatorKind::rsgf;
  if (t.contains("estimator")) {
    try {
      kind = parse_estimator(t.at("estimator").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("tuneup: ") + e.what());
    }
  }
  cfg.rough = {default_rough_algorithm(kind), 400};
  cfg.fine = {default_fine_algorithm(kind), 0};
  if (t.contains("rough")) cfg.rough = stage_from_json(t.at("rough"), cfg.rough, "tuneup.rough");
  if (t.contains("fine")) cfg.fine = stage_from_json(t.at("fine"), cfg.fine, "tuneup.fine");
  if (t.contains("rough_result")) cfg.rough_result = t.at("rough_result").get<ParamVector>();
  cfg.irb = cfg.objective.rb;
  if (t.contains("irb_sequences")) cfg.irb.n_sequences = t.at("irb_sequences").get<std::size_t>();
  if (t.contains("irb_shots")) cfg.irb.shots = t.at("irb_shots").get<std::size_t>();
  try {
    cfg.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("tuneup: ") + e.what());
  }
  return cfg;
}

nlohmann::ordered_json tuneup_report(const TuneupResult& r) {
  nlohmann::ordered_json j;
  auto stage = [](const StageResult& s) {
    nlohmann::ordered_json o;
    o["updates"] = s.trajectory.records.size();
    o["best_iteration"] = s.best_iteration;
    o["best_loss"] = s.best_loss;
    o["best_fidelity"] = s.best_fidelity;
    o["best_theta"] = s.best_theta;
    return o;
  };
  if (r.rough) j["rough"] = stage(*r.rough);
  if (r.fine) j["fine"] = stage(*r.fine);
  j["start_fidelity"] = r.start_fidelity;
  if (r.reference_fit) {
    j["p_ref"] = r.reference_fit->decay_rate;
    j["p_ref_se"] = r.reference_fit->decay_rate_se;
  }
  if (r.interleaved_fit) {
    j["p_int"] = r.interleaved_fit->decay_rate;
    j["p_int_se"] = r.interleaved_fit->decay_rate_se;
    j["irb_fidelity"] = r.irb_fidelity;
    j["irb_fidelity_se"] = r.irb_fidelity_se;
    j["irb_warning"] = r.irb_warning;
  }
  j["direct_fidelity"] = r.direct_fidelity;
  if (r.failure) j["failure"] = *r.failure;
  return j;
}

}  // namespace bbopt
