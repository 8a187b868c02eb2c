// bbopt: run benchmark experiments, landscape scans and gate tune-ups.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbopt/bench.hpp"
#include "bbopt/experiment.hpp"
#include "bbopt/schedules.hpp"
#include "bbopt/version.hpp"

namespace fs = std::filesystem;
using namespace bbopt;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
};

ExperimentConfig load_with_overrides(const Options& o) {
  nlohmann::json j = o.config.empty() ? nlohmann::json::object() : load_json(o.config);
  ExperimentConfig cfg = experiment_from_json(j);
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.repeats) {
    if (*o.repeats < 1) throw ConfigError("--repeats must be >= 1");
    cfg.repeats = *o.repeats;
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

int cmd_run(const Options& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const ExperimentResult res = run_experiment(cfg);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  bool any_completed = false;
  std::printf("%-16s %9s %9s %12s %12s %12s\n", "algorithm", "completed", "failed", "median", "mean", "std");
  for (const auto& s : res.summaries) {
    any_completed = any_completed || s.final_stats.n_completed > 0;
    std::printf("%-16s %9zu %9zu %12.6g %12.6g %12.6g\n", s.algorithm.c_str(), s.final_stats.n_completed,
                s.final_stats.n_failed, s.final_stats.median, s.final_stats.mean, s.final_stats.std);
  }
  std::printf("wrote %s\n", (cfg.output_dir / cfg.name).string().c_str());
  return any_completed ? 0 : 2;
}

int cmd_scan(const Options& o) {
  if (o.config.empty()) throw ConfigError("scan needs --config with a 'scan' section");
  const nlohmann::json j = load_json(o.config);
  const ExperimentConfig cfg = load_with_overrides(o);
  if (!j.contains("scan")) throw ConfigError("config has no 'scan' section");
  const ScanSpec spec = scan_from_json(j.at("scan"));
  if (cfg.objective_cfg.active_dims.size() != 2) throw ConfigError("scan needs objective.active_dims with two entries");
  const auto n = spec.first.points * spec.second.points;
  if (n > spec.max_points) throw ConfigError("scan grid exceeds max_points");
  const ScanResult scan = landscape_scan(spec, cfg.objective, cfg.objective_cfg, cfg.base_seed);
  const fs::path dir = cfg.output_dir / cfg.name;
  fs::create_directories(dir);
  write_file_atomic(dir / "scan.csv", scan_csv(scan));
  std::printf("wrote %s (%zu x %zu)\n", (dir / "scan.csv").string().c_str(), scan.second_values.size(),
              scan.first_values.size());
  return 0;
}

int cmd_tuneup(const Options& o) {
  const nlohmann::json j = o.config.empty() ? nlohmann::json::object() : load_json(o.config);
  const ExperimentConfig exp = load_with_overrides(o);
  const TuneupConfig cfg = tuneup_from_json(j, exp.base_seed);
  const TuneupResult res = two_stage_tuneup(cfg);

  const fs::path dir = exp.output_dir / exp.name;
  fs::create_directories(dir);
  if (res.rough) write_file_atomic(dir / "rough.csv", trajectory_csv("rough", res.rough->trajectory));
  if (res.fine) write_file_atomic(dir / "fine.csv", trajectory_csv("fine", res.fine->trajectory));
  const auto report = tuneup_report(res);
  write_file_atomic(dir / "tuneup.json", report.dump(2) + '\n');

  if (res.rough)
    std::printf("rough: best iteration %zu, loss %.6g, fidelity %.6f\n", res.rough->best_iteration,
                res.rough->best_loss, res.rough->best_fidelity);
  if (res.fine)
    std::printf("fine:  best iteration %zu, L_RB %.6g, fidelity %.6f\n", res.fine->best_iteration,
                res.fine->best_loss, res.fine->best_fidelity);
  if (res.interleaved_fit)
    std::printf("interleaved RB fidelity %.6f +- %.1e (direct %.6f)%s\n", res.irb_fidelity, res.irb_fidelity_se,
                res.direct_fidelity, res.irb_warning ? " [interleaved decay above reference]" : "");
  std::printf("wrote %s\n", dir.string().c_str());
  if (res.failure) {
    std::cerr << "error: " << *res.failure << '\n';
    return 2;
  }
  return 0;
}

int cmd_validate(const Options& o) {
  ScheduleSet s;
  if (!o.config.empty()) {
    const nlohmann::json j = load_json(o.config);
    if (j.contains("schedules")) s = schedules_from_json(j.at("schedules"));
  }
  const ValidationReport report = validate_schedules(s);
  for (const auto& c : report.conditions)
    std::printf("%-20s %s  %s\n", c.name.c_str(), c.passed ? "pass" : "FAIL", c.inequality.c_str());
  std::printf("%s\n", report.all_passed() ? "all conditions hold" : "some conditions fail (advisory)");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Derivative-free optimizers and simulated transmon pulse benchmarks"};
  app.require_subcommand(1);
  Options opts;
  std::uint64_t seed = 0;
  std::size_t repeats = 0;

  auto add_common = [&](CLI::App* sub, bool with_repeats) {
    sub->add_option("--config", opts.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory (overrides run.output)");
    sub->add_option("--seed", seed, "base seed (overrides config)");
    if (with_repeats) sub->add_option("--repeats", repeats, "number of repeats (overrides config)");
  };
  auto* run = app.add_subcommand("run", "run an experiment (algorithms x repeats)");
  add_common(run, true);
  auto* scan = app.add_subcommand("scan", "exact-loss grid over two active dims");
  add_common(scan, false);
  auto* tune = app.add_subcommand("tuneup", "two-stage X90 tune-up with interleaved RB");
  add_common(tune, false);
  auto* validate = app.add_subcommand("validate", "check schedule convergence conditions");
  validate->add_option("--config", opts.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_subcommand("version", "print version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (auto* sub : {run, scan, tune}) {
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->get_option_no_throw("--repeats") && sub->count("--repeats")) opts.repeats = repeats;
  }

  try {
    if (*run) return cmd_run(opts);
    if (*scan) return cmd_scan(opts);
    if (*tune) return cmd_tuneup(opts);
    if (*validate) return cmd_validate(opts);
    std::printf("bbopt %s\n", kVersion);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
