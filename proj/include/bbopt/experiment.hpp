#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbopt/common.hpp"
#include "bbopt/estimators.hpp"
#include "bbopt/objectives.hpp"
#include "bbopt/optimizers.hpp"
#include "bbopt/schedules.hpp"

namespace bbopt {

/// Raised for malformed or inconsistent configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One optimizer variant in an experiment, e.g. "AdamSPSA".
struct AlgorithmSpec {
  std::string name;
  UpdateRule update_rule = UpdateRule::adam;
  EstimatorConfig estimator;
  ScheduleSet schedules;
};

/// Starting point: an explicit vector, or uniform(low, high) draws from
/// their own seed so every algorithm and repeat starts at the same place.
struct InitialPoint {
  std::optional<ParamVector> theta;
  double low = 0.0;
  double high = 0.0;
  std::uint64_t seed = 0;

  ParamVector resolve(std::size_t dim) const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  LossKind objective = LossKind::lx;
  ObjectiveConfig objective_cfg;
  /// Synthetic objectives only.
  double noise_sigma = 0.0;
  std::size_t synthetic_dim = 5;

  std::vector<AlgorithmSpec> algorithms;
  std::size_t budget = 480;
  std::size_t repeats = 1;
  std::uint64_t base_seed = 0;
  std::optional<Box> clip_box;
  InitialPoint initial;
  /// Loss column from the noiseless objective (true) or from one extra
  /// noisy measurement per iterate (false). Never charged to the budget.
  bool exact_monitor = true;
  std::filesystem::path output_dir = "out";

  std::size_t dim() const;
  /// Throws ConfigError.
  void check() const;
};

/// Parses the nested config layout described in README.md. Unknown keys are
/// rejected. Throws ConfigError.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

/// Parsers for the individual sections, shared with the other subcommands.
ScheduleSet schedules_from_json(const nlohmann::json& j, ScheduleSet base = {});
EstimatorConfig estimator_from_json(const nlohmann::json& j, EstimatorConfig base = {});
ObjectiveConfig objective_from_json(const nlohmann::json& j, ObjectiveConfig base = {});

/// Objective for one repeat. Pulse losses draw noise from (seed, stream 1).
Objective make_objective(const ExperimentConfig& cfg, std::uint64_t seed);
/// Monitor for the trajectory loss column.
Objective make_monitor(const ExperimentConfig& cfg, std::uint64_t seed);

struct RunResult {
  std::string algorithm;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  Trajectory trajectory;
};

struct SummaryRow {
  std::size_t n_evals = 0;
  double loss_mean = 0.0;
  double loss_std = 0.0;
  std::size_t n_runs = 0;
};

struct FinalStats {
  std::size_t n_completed = 0;
  std::size_t n_failed = 0;
  double median = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

/// Per-algorithm loss statistics at evaluation counts present in every
/// completed run. Failed runs are left out. Sample (n-1) standard deviation.
std::vector<SummaryRow> summarize(const std::vector<const Trajectory*>& runs);
FinalStats final_stats(const std::vector<const Trajectory*>& runs);

struct AlgorithmSummary {
  std::string algorithm;
  std::vector<SummaryRow> rows;
  FinalStats final_stats;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<AlgorithmSummary> summaries;
  std::vector<std::string> warnings;
};

/// All algorithms x repeats. Repeat r uses seed base_seed + r for both the
/// perturbation stream and the objective's noise stream.
ExperimentResult execute_experiment(const ExperimentConfig& cfg);

/// execute_experiment plus files under output_dir/name:
///   <algorithm>_r<k>.csv   one trajectory per run
///   summary.jsonl          one line per (algorithm, aligned n_evals)
///   final_stats.json
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Trajectory CSV: header `run_id,iteration,n_evals,loss,a_t,c_t,beta_t,theta_0,...`.
/// Row 0 is the initial point with n_evals 0 and zero schedule columns.
/// Reals are printed with %.17g so they read back exactly.
std::string trajectory_csv(const std::string& run_id, const Trajectory& traj);

struct CsvTrajectory {
  std::string run_id;
  std::vector<std::size_t> iteration;
  std::vector<std::size_t> n_evals;
  std::vector<double> loss;
  std::vector<ParamVector> theta;
};

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path);
/// Trajectory with only the loss / n_evals columns filled, for summarize().
Trajectory to_trajectory(const CsvTrajectory& csv);

std::string summary_jsonl(const std::vector<AlgorithmSummary>& summaries);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string run_id(const std::string& algorithm, std::size_t repeat);

}  // namespace bbopt
