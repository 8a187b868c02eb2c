#include "bbopt/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace bbopt {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(section + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) throw ConfigError(section + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& section, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key, const std::string& section, std::size_t fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(section + "." + key + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

template <typename F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string safe_name(const std::string& name) {
  std::string out = name;
  for (char& ch : out)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')) ch = '_';
  return out.empty() ? "run" : out;
}

void append_double(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

}  // namespace

ParamVector InitialPoint::resolve(std::size_t dim) const {
  if (theta) {
    if (theta->size() != dim)
      throw ConfigError("initial theta has " + std::to_string(theta->size()) + " entries, expected " +
                        std::to_string(dim));
    return *theta;
  }
  ParamVector out(dim, low);
  if (high > low) {
    Rng rng = make_stream(seed, 0);
    std::uniform_real_distribution<double> u(low, high);
    for (auto& x : out) x = u(rng);
  }
  return out;
}

std::size_t ExperimentConfig::dim() const {
  switch (objective) {
    case LossKind::sphere:
    case LossKind::shifted_quadratic:
    case LossKind::cubic: return synthetic_dim;
    default: return objective_cfg.dim();
  }
}

void ExperimentConfig::check() const {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (algorithms.empty()) throw ConfigError("no algorithms configured");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  if (dim() == 0) throw ConfigError("parameter dimension is zero");
  std::set<std::string> names;
  for (const auto& a : algorithms) {
    if (!names.insert(safe_name(a.name)).second) throw ConfigError("duplicate algorithm name: " + a.name);
    if (a.estimator.n_samples < 1) throw ConfigError(a.name + ": n_samples must be >= 1");
    wrap(a.name, [&] { a.schedules.check(); return 0; });
  }
  wrap("objective", [&] { objective_cfg.check(); return 0; });
  if (clip_box && !(clip_box->low < clip_box->high)) throw ConfigError("clip_box: low must be < high");
  initial.resolve(dim());
}

ScheduleSet schedules_from_json(const json& j, ScheduleSet s) {
  const std::string sec = "schedules";
  check_keys(j, sec, {"a0", "alpha", "c0", "zeta", "beta0", "lambda", "gamma", "delta", "truncation_step"});
  s.a0 = get(j, "a0", sec, s.a0);
  s.alpha = get(j, "alpha", sec, s.alpha);
  s.c0 = get(j, "c0", sec, s.c0);
  s.zeta = get(j, "zeta", sec, s.zeta);
  s.beta0 = get(j, "beta0", sec, s.beta0);
  s.lambda = get(j, "lambda", sec, s.lambda);
  s.gamma = get(j, "gamma", sec, s.gamma);
  s.delta = get(j, "delta", sec, s.delta);
  if (j.contains("truncation_step")) {
    if (j.at("truncation_step").is_null())
      s.truncation_step.reset();
    else
      s.truncation_step = get_count(j, "truncation_step", sec, 0);
  }
  wrap(sec, [&] { s.check(); return 0; });
  return s;
}

EstimatorConfig estimator_from_json(const json& j, EstimatorConfig e) {
  const std::string sec = "estimator";
  check_keys(j, sec, {"estimator", "n_samples", "count_baseline"});
  if (j.contains("estimator"))
    e.kind = wrap(sec, [&] { return parse_estimator(get<std::string>(j, "estimator", sec, "")); });
  e.n_samples = get_count(j, "n_samples", sec, e.n_samples);
  e.count_baseline = get(j, "count_baseline", sec, e.count_baseline);
  if (e.n_samples < 1) throw ConfigError("estimator.n_samples must be >= 1");
  return e;
}

ObjectiveConfig objective_from_json(const json& j, ObjectiveConfig o) {
  const std::string sec = "simulator";
  check_keys(j, sec,
             {"n_levels", "anharmonicity_mhz", "drive_scale_mhz", "dt_ns", "duration_ns", "distortion_fir",
              "rb_lengths", "rb_sequences", "rb_shots"});
  o.transmon.n_levels = get(j, "n_levels", sec, o.transmon.n_levels);
  if (j.contains("anharmonicity_mhz"))
    o.transmon.anharmonicity = TransmonParams::from_mhz(get(j, "anharmonicity_mhz", sec, 0.0));
  if (j.contains("drive_scale_mhz"))
    o.transmon.drive_scale = TransmonParams::from_mhz(get(j, "drive_scale_mhz", sec, 0.0));
  o.dt_ns = get(j, "dt_ns", sec, o.dt_ns);
  o.duration_ns = get(j, "duration_ns", sec, o.duration_ns);
  o.distortion_fir = get(j, "distortion_fir", sec, o.distortion_fir);
  o.rb.lengths = get(j, "rb_lengths", sec, o.rb.lengths);
  o.rb.n_sequences = get_count(j, "rb_sequences", sec, o.rb.n_sequences);
  o.rb.shots = get_count(j, "rb_shots", sec, o.rb.shots);
  return o;
}

namespace {

struct Defaults {
  UpdateRule rule = UpdateRule::adam;
  EstimatorConfig estimator;
  ScheduleSet schedules;
};

AlgorithmSpec algorithm_from_json(const json& j, const Defaults& d, std::size_t index) {
  const std::string sec = "algorithms[" + std::to_string(index) + "]";
  check_keys(j, sec, {"name", "update_rule", "estimator", "schedules"});
  AlgorithmSpec a;
  a.update_rule = d.rule;
  if (j.contains("update_rule"))
    a.update_rule = wrap(sec, [&] { return parse_update_rule(get<std::string>(j, "update_rule", sec, "")); });
  a.estimator = j.contains("estimator") ? estimator_from_json(j.at("estimator"), d.estimator) : d.estimator;
  a.schedules = j.contains("schedules") ? schedules_from_json(j.at("schedules"), d.schedules) : d.schedules;
  a.name = get<std::string>(j, "name", sec,
                            std::string(to_string(a.update_rule)) + "-" + std::string(to_string(a.estimator.kind)));
  return a;
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
  check_keys(j, "config",
             {"name", "objective", "simulator", "schedules", "estimator", "optimizer", "run", "algorithms", "scan",
              "tuneup"});
  ExperimentConfig cfg;
  cfg.name = get<std::string>(j, "name", "config", cfg.name);
  if (cfg.name.empty() || safe_name(cfg.name) != cfg.name)
    throw ConfigError("name must be non-empty and use only letters, digits, '-' and '_'");

  if (j.contains("simulator")) cfg.objective_cfg = objective_from_json(j.at("simulator"), cfg.objective_cfg);
  if (j.contains("objective")) {
    const json& o = j.at("objective");
    const std::string sec = "objective";
    check_keys(o, sec, {"objective", "shots", "k_list", "active_dims", "base", "noise_sigma", "dim"});
    if (o.contains("objective"))
      cfg.objective = wrap(sec, [&] { return parse_loss(get<std::string>(o, "objective", sec, "")); });
    cfg.objective_cfg.shots = get_count(o, "shots", sec, cfg.objective_cfg.shots);
    cfg.objective_cfg.k_list = get(o, "k_list", sec, cfg.objective_cfg.k_list);
    cfg.objective_cfg.active_dims = get(o, "active_dims", sec, cfg.objective_cfg.active_dims);
    cfg.objective_cfg.base = get(o, "base", sec, cfg.objective_cfg.base);
    cfg.noise_sigma = get(o, "noise_sigma", sec, cfg.noise_sigma);
    cfg.synthetic_dim = get_count(o, "dim", sec, cfg.synthetic_dim);
  }

  Defaults d;
  if (j.contains("schedules")) d.schedules = schedules_from_json(j.at("schedules"));
  if (j.contains("estimator")) d.estimator = estimator_from_json(j.at("estimator"));
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    const std::string sec = "optimizer";
    check_keys(o, sec, {"update_rule", "budget_evaluations", "seed", "clip_box"});
    if (o.contains("update_rule"))
      d.rule = wrap(sec, [&] { return parse_update_rule(get<std::string>(o, "update_rule", sec, "")); });
    cfg.budget = get_count(o, "budget_evaluations", sec, cfg.budget);
    cfg.base_seed = get_count(o, "seed", sec, cfg.base_seed);
    if (o.contains("clip_box") && !o.at("clip_box").is_null()) {
      const json& b = o.at("clip_box");
      check_keys(b, "optimizer.clip_box", {"low", "high"});
      if (!b.contains("low") || !b.contains("high")) throw ConfigError("optimizer.clip_box needs low and high");
      cfg.clip_box = Box{get(b, "low", "clip_box", 0.0), get(b, "high", "clip_box", 0.0)};
    }
  }

  if (j.contains("run")) {
    const json& r = j.at("run");
    const std::string sec = "run";
    check_keys(r, sec, {"repeats", "base_seed", "monitor", "initial", "output"});
    cfg.repeats = get_count(r, "repeats", sec, cfg.repeats);
    if (r.contains("base_seed")) {
      if (j.contains("optimizer") && j.at("optimizer").contains("seed"))
        throw ConfigError("set either run.base_seed or optimizer.seed, not both");
      cfg.base_seed = get_count(r, "base_seed", sec, cfg.base_seed);
    }
    const auto monitor = get<std::string>(r, "monitor", sec, "exact");
    if (monitor != "exact" && monitor != "measured") throw ConfigError("run.monitor must be 'exact' or 'measured'");
    cfg.exact_monitor = monitor == "exact";
    cfg.output_dir = get<std::string>(r, "output", sec, cfg.output_dir.string());
    if (r.contains("initial")) {
      const json& in = r.at("initial");
      check_keys(in, "run.initial", {"theta", "uniform", "seed"});
      if (in.contains("theta") && in.contains("uniform")) throw ConfigError("run.initial: theta and uniform are exclusive");
      if (in.contains("theta")) cfg.initial.theta = get<ParamVector>(in, "theta", "run.initial", {});
      if (in.contains("uniform")) {
        const auto range = get<std::vector<double>>(in, "uniform", "run.initial", {});
        if (range.size() != 2 || !(range[0] <= range[1]))
          throw ConfigError("run.initial.uniform must be [low, high] with low <= high");
        cfg.initial.low = range[0];
        cfg.initial.high = range[1];
      }
      cfg.initial.seed = get_count(in, "seed", "run.initial", cfg.initial.seed);
    }
  }

  if (j.contains("algorithms")) {
    const json& list = j.at("algorithms");
    if (!list.is_array() || list.empty()) throw ConfigError("algorithms must be a non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) cfg.algorithms.push_back(algorithm_from_json(list[i], d, i));
  } else {
    cfg.algorithms.push_back(algorithm_from_json(json::object(), d, 0));
  }
  cfg.check();
  return cfg;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_from_json(load_json(path));
}

namespace {

bool is_synthetic(LossKind k) {
  return k == LossKind::sphere || k == LossKind::shifted_quadratic || k == LossKind::cubic;
}

}  // namespace

Objective make_objective(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (is_synthetic(cfg.objective)) return synthetic_objective(cfg.objective, cfg.noise_sigma, seed);
  return make_pulse_objective(cfg.objective, cfg.objective_cfg, seed);
}

Objective make_monitor(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (is_synthetic(cfg.objective))
    return synthetic_objective(cfg.objective, cfg.exact_monitor ? 0.0 : cfg.noise_sigma, seed, 3);
  ObjectiveConfig oc = cfg.objective_cfg;
  if (cfg.exact_monitor) {
    oc.shots = 0;
    oc.rb.shots = 0;
  }
  return make_pulse_objective(cfg.objective, oc, seed, 3);
}

namespace {

std::vector<std::pair<std::size_t, double>> loss_series(const Trajectory& t) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(t.records.size() + 1);
  out.emplace_back(0, t.initial_loss);
  for (const auto& r : t.records) out.emplace_back(r.n_evals, r.loss);
  return out;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<const Trajectory*>& runs) {
  std::vector<std::vector<std::pair<std::size_t, double>>> series;
  for (const Trajectory* t : runs)
    if (!t->failure) series.push_back(loss_series(*t));
  if (series.empty()) return {};

  std::vector<SummaryRow> rows;
  for (const auto& [n_evals, ignored] : series.front()) {
    std::vector<double> values;
    for (const auto& s : series) {
      auto it = std::find_if(s.begin(), s.end(), [n = n_evals](const auto& p) { return p.first == n; });
      if (it == s.end()) break;
      values.push_back(it->second);
    }
    if (values.size() != series.size()) continue;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
    rows.push_back({n_evals, mean, sd, values.size()});
  }
  return rows;
}

FinalStats final_stats(const std::vector<const Trajectory*>& runs) {
  FinalStats fs;
  std::vector<double> finals;
  for (const Trajectory* t : runs) {
    if (t->failure) {
      ++fs.n_failed;
      continue;
    }
    finals.push_back(t->final_loss());
  }
  fs.n_completed = finals.size();
  if (finals.empty()) return fs;
  for (double v : finals) fs.mean += v;
  fs.mean /= static_cast<double>(finals.size());
  double var = 0.0;
  for (double v : finals) var += (v - fs.mean) * (v - fs.mean);
  fs.std = finals.size() > 1 ? std::sqrt(var / static_cast<double>(finals.size() - 1)) : 0.0;
  std::sort(finals.begin(), finals.end());
  const std::size_t n = finals.size();
  fs.median = n % 2 ? finals[n / 2] : (finals[n / 2 - 1] + finals[n / 2]) / 2.0;
  return fs;
}

std::string run_id(const std::string& algorithm, std::size_t repeat) {
  return safe_name(algorithm) + "_r" + std::to_string(repeat);
}

ExperimentResult execute_experiment(const ExperimentConfig& cfg) {
  cfg.check();
  ExperimentResult result;
  const ParamVector start = cfg.initial.resolve(cfg.dim());

  for (const auto& algo : cfg.algorithms) {
    OptimizerConfig oc;
    oc.rule = algo.update_rule;
    oc.estimator = algo.estimator;
    oc.schedules = algo.schedules;
    oc.budget = cfg.budget;
    oc.clip_box = cfg.clip_box;

    std::vector<const Trajectory*> mine;
    const std::size_t first = result.runs.size();
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      RunResult run{algo.name, r, cfg.base_seed + r, {}};
      oc.seed = run.seed;
      try {
        run.trajectory = run_optimization(make_objective(cfg, run.seed), make_monitor(cfg, run.seed), oc, start);
      } catch (const std::exception& e) {
        // Failure before the first update (e.g. the initial monitor call).
        run.trajectory.initial_theta = start;
        run.trajectory.initial_loss = std::nan("");
        run.trajectory.failure = e.what();
      }
      if (run.trajectory.failure)
        result.warnings.push_back(run_id(algo.name, r) + " failed: " + *run.trajectory.failure);
      result.runs.push_back(std::move(run));
    }
    for (std::size_t i = first; i < result.runs.size(); ++i) mine.push_back(&result.runs[i].trajectory);

    AlgorithmSummary summary{algo.name, summarize(mine), final_stats(mine)};
    if (summary.final_stats.n_failed > 0)
      result.warnings.push_back(algo.name + ": summary covers " + std::to_string(summary.final_stats.n_completed) +
                                " of " + std::to_string(cfg.repeats) + " runs");
    result.summaries.push_back(std::move(summary));
  }
  return result;
}

std::string trajectory_csv(const std::string& id, const Trajectory& traj) {
  const std::size_t p = traj.initial_theta.size();
  std::string out = "run_id,iteration,n_evals,loss,a_t,c_t,beta_t";
  for (std::size_t i = 0; i < p; ++i) out += ",theta_" + std::to_string(i);
  out += '\n';

  auto row = [&](std::size_t it, std::size_t n, double loss, double a, double c, double b, const ParamVector& th) {
    out += id;
    out += ',' + std::to_string(it) + ',' + std::to_string(n) + ',';
    append_double(out, loss);
    for (double x : {a, c, b}) {
      out += ',';
      append_double(out, x);
    }
    for (double x : th) {
      out += ',';
      append_double(out, x);
    }
    out += '\n';
  };
  row(0, 0, traj.initial_loss, 0.0, 0.0, 0.0, traj.initial_theta);
  for (const auto& r : traj.records) row(r.t, r.n_evals, r.loss, r.a_t, r.c_t, r.beta_t, r.theta);
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const std::string& where) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // from_chars does not accept "nan"/"inf" spelled by printf in every libstdc++.
    if constexpr (std::is_floating_point_v<T>) {
      if (s == "nan" || s == "-nan") return std::nan("");
      if (s == "inf") return INFINITY;
      if (s == "-inf") return -INFINITY;
    }
    throw std::runtime_error(where + ": cannot parse '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split(line);
  if (header.size() < 7 || header[0] != "run_id" || header[2] != "n_evals" || header[3] != "loss")
    throw std::runtime_error(path.string() + ": unexpected header");
  const std::size_t p = header.size() - 7;

  CsvTrajectory csv;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) throw std::runtime_error(where + ": wrong column count");
    csv.run_id = std::string(cells[0]);
    csv.iteration.push_back(parse_number<std::size_t>(cells[1], where));
    csv.n_evals.push_back(parse_number<std::size_t>(cells[2], where));
    csv.loss.push_back(parse_number<double>(cells[3], where));
    ParamVector th(p);
    for (std::size_t i = 0; i < p; ++i) th[i] = parse_number<double>(cells[7 + i], where);
    csv.theta.push_back(std::move(th));
  }
  if (csv.loss.empty()) throw std::runtime_error(path.string() + ": no rows");
  return csv;
}

Trajectory to_trajectory(const CsvTrajectory& csv) {
  Trajectory t;
  t.initial_theta = csv.theta.front();
  t.initial_loss = csv.loss.front();
  for (std::size_t i = 1; i < csv.loss.size(); ++i) {
    IterationRecord r;
    r.t = csv.iteration[i];
    r.n_evals = csv.n_evals[i];
    r.loss = csv.loss[i];
    r.theta = csv.theta[i];
    t.records.push_back(std::move(r));
  }
  return t;
}

std::string summary_jsonl(const std::vector<AlgorithmSummary>& summaries) {
  std::string out;
  for (const auto& s : summaries) {
    for (const auto& row : s.rows) {
      nlohmann::ordered_json line;
      line["algorithm"] = s.algorithm;
      line["n_evals"] = row.n_evals;
      line["loss_mean"] = row.loss_mean;
      line["loss_std"] = row.loss_std;
      line["n_runs"] = row.n_runs;
      out += line.dump() + '\n';
    }
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result = execute_experiment(cfg);
  const std::filesystem::path dir = cfg.output_dir / cfg.name;
  std::filesystem::create_directories(dir);

  for (const auto& run : result.runs) {
    const std::string id = run_id(run.algorithm, run.repeat);
    write_file_atomic(dir / (id + ".csv"), trajectory_csv(id, run.trajectory));
  }
  write_file_atomic(dir / "summary.jsonl", summary_jsonl(result.summaries));

  nlohmann::ordered_json stats;
  stats["name"] = cfg.name;
  stats["repeats"] = cfg.repeats;
  stats["base_seed"] = cfg.base_seed;
  stats["budget_evaluations"] = cfg.budget;
  for (const auto& s : result.summaries) {
    nlohmann::ordered_json a;
    a["algorithm"] = s.algorithm;
    a["n_completed"] = s.final_stats.n_completed;
    a["n_failed"] = s.final_stats.n_failed;
    a["final_loss_median"] = s.final_stats.median;
    a["final_loss_mean"] = s.final_stats.mean;
    a["final_loss_std"] = s.final_stats.std;
    stats["algorithms"].push_back(a);
  }
  stats["failed_runs"] = nlohmann::ordered_json::array();
  for (const auto& run : result.runs)
    if (run.trajectory.failure)
      stats["failed_runs"].push_back({{"run_id", run_id(run.algorithm, run.repeat)}, {"error", *run.trajectory.failure}});
  stats["warnings"] = result.warnings;
  write_file_atomic(dir / "final_stats.json", stats.dump(2) + '\n');
  return result;
}

}  // namespace bbopt
