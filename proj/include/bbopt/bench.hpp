#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbopt/experiment.hpp"
#include "bbopt/objectives.hpp"
#include "bbopt/optimizers.hpp"
#include "bbopt/rb.hpp"

namespace bbopt {

struct AxisSpec {
  double low = 0.0;
  double high = 0.0;
  std::size_t points = 1;

  /// Evenly spaced values, endpoints included; a single point sits at low.
  std::vector<double> values() const;
};

struct ScanSpec {
  AxisSpec first;   // active_dims[0]
  AxisSpec second;  // active_dims[1]
  std::size_t max_points = 250000;
};

struct ScanResult {
  std::vector<double> first_values;
  std::vector<double> second_values;
  /// loss[i][j] at (first_values[j], second_values[i]).
  std::vector<std::vector<double>> loss;
};

/// Exact-measurement loss on a grid over the two active dims of cfg.
/// Throws std::invalid_argument unless cfg.active_dims has two entries or if
/// the grid exceeds max_points.
ScanResult landscape_scan(const ScanSpec& spec, LossKind kind, ObjectiveConfig cfg, std::uint64_t seed = 0);

/// Matrix CSV: header `second\first,<first values>`, one row per second value.
std::string scan_csv(const ScanResult& scan);

ScanSpec scan_from_json(const nlohmann::json& j);

struct StageConfig {
  AlgorithmSpec algorithm;
  std::size_t budget = 0;
};

struct TuneupConfig {
  /// Shots apply to the rough stage; rb settings to the fine stage.
  ObjectiveConfig objective;
  StageConfig rough;
  StageConfig fine;
  std::uint64_t seed = 0;
  /// Skip the rough stage and start the fine stage here.
  std::optional<ParamVector> rough_result;
  /// RB settings for the final reference / interleaved pair.
  RbSettings irb;

  void check() const;
};

/// Fine-stage defaults for the adaptive variants: a0 = c0 = 0.002 (SPSA) or
/// 0.004 (RSGF), lambda = 0.1.
AlgorithmSpec default_fine_algorithm(EstimatorKind kind);
/// Rough-stage default: the adaptive variant with the stock schedules;
/// RSGF uses N = 2.
AlgorithmSpec default_rough_algorithm(EstimatorKind kind);

struct StageResult {
  Trajectory trajectory;
  /// 0 means the starting point.
  std::size_t best_iteration = 0;
  ParamVector best_theta;
  double best_loss = 0.0;
  double best_fidelity = 0.0;  // direct average gate fidelity
};

struct TuneupResult {
  std::optional<StageResult> rough;
  std::optional<StageResult> fine;
  double start_fidelity = 0.0;  // at the fine stage's starting point
  std::optional<RbFitResult> reference_fit;
  std::optional<RbFitResult> interleaved_fit;
  double irb_fidelity = 0.0;
  double irb_fidelity_se = 0.0;
  bool irb_warning = false;
  /// Direct average gate fidelity of the final gate against ideal X90.
  double direct_fidelity = 0.0;
  std::optional<std::string> failure;
};

/// Lowest recorded loss, ties to the earliest iterate.
std::size_t best_iterate(const Trajectory& traj);

/// Rough stage on L from the zero vector (or rough_result), fine stage on
/// L_RB from the best rough iterate, then interleaved RB on the best fine
/// iterate. Stage failures stop the pipeline with partial results kept.
TuneupResult two_stage_tuneup(const TuneupConfig& cfg);

TuneupConfig tuneup_from_json(const nlohmann::json& j, std::uint64_t seed);
nlohmann::ordered_json tuneup_report(const TuneupResult& r);

}  // namespace bbopt
