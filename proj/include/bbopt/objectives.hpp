#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bbopt/common.hpp"
#include "bbopt/pulse.hpp"
#include "bbopt/rb.hpp"
#include "bbopt/transmon.hpp"

namespace bbopt {

/// Simulated device, pulse timing, measurement and which Hann coefficients
/// the optimizer controls.
struct ObjectiveConfig {
  TransmonParams transmon;
  double duration_ns = 20.0;
  double dt_ns = 1.0;
  std::vector<double> distortion_fir;
  /// Repetition counts k of the gate under test; ideal targets are defined
  /// for k = 1..4.
  std::vector<int> k_list = {1, 2};
  /// Shots per prepared circuit, 0 = exact populations.
  std::size_t shots = 1000;
  /// Indices into the 20-entry (A, B) layout that theta maps onto. Empty
  /// means theta is the full layout.
  std::vector<std::size_t> active_dims;
  /// Values of the coefficients theta does not control.
  std::vector<double> base = std::vector<double>(kPulseDim, 0.0);
  /// Settings for the RB-based loss.
  RbSettings rb;

  void check() const;
  std::size_t dim() const { return active_dims.empty() ? kPulseDim : active_dims.size(); }
  /// Full pulse parameters for an optimizer vector.
  HannPulseParams expand(std::span<const double> theta) const;
};

struct LossValue {
  double value = 0.0;
  /// Prepared-and-measured circuits behind this value.
  std::size_t n_calls = 0;
  std::optional<double> lx;
  std::optional<double> ly;
};

/// Simulated propagator of the Hann pulse (after optional distortion).
Propagator hann_gate(const HannPulseParams& ab, const ObjectiveConfig& cfg);

/// Excited-state population after reference X90 then k applications of the
/// gate: ideal values 1, 1/2, 0, 1/2 for k = 1..4.
double ideal_target_x(int k);
/// Same for reference Y90: always 1/2.
double ideal_target_y(int k);

LossValue loss_x(const HannPulseParams& ab, const ObjectiveConfig& cfg, Rng& rng);
LossValue loss_y(const HannPulseParams& ab, const ObjectiveConfig& cfg, Rng& rng);
/// (loss_x + loss_y) / 2 from a single simulated propagator.
LossValue loss_combined(const HannPulseParams& ab, const ObjectiveConfig& cfg, Rng& rng);
/// (1 - fitted Clifford decay) * 100. Throws FitError when the fit fails.
LossValue loss_rb(const HannPulseParams& ab, const ObjectiveConfig& cfg, Rng& rng);

/// Same losses on an already simulated gate.
LossValue loss_x(const Propagator& gate, const ObjectiveConfig& cfg, Rng& rng);
LossValue loss_y(const Propagator& gate, const ObjectiveConfig& cfg, Rng& rng);
LossValue loss_rb(const Propagator& gate, const ObjectiveConfig& cfg, Rng& rng);

enum class LossKind { lx, ly, l_combined, l_rb, sphere, shifted_quadratic, cubic };

LossKind parse_loss(std::string_view name);
std::string_view to_string(LossKind kind);

/// Pulse-loss objective over theta (mapped through cfg.active_dims). Every
/// call draws fresh shot noise (and RB sequences) from make_stream(seed,
/// stream). Copies of the returned objective share that stream.
Objective make_pulse_objective(LossKind kind, ObjectiveConfig cfg, std::uint64_t seed, std::uint64_t stream = 1);

/// Synthetic test functions with known ground truth:
///   sphere             sum x_i^2
///   shifted_quadratic  sum (x_i - 1)^2
///   cubic              sum x_i^3
/// plus additive N(0, noise_sigma^2) noise on every call when noise_sigma > 0,
/// drawn from make_stream(seed, stream).
Objective synthetic_objective(LossKind kind, double noise_sigma, std::uint64_t seed, std::uint64_t stream = 2);

/// Analytic gradient of the noiseless synthetic function.
std::vector<double> synthetic_gradient(LossKind kind, std::span<const double> theta);

}  // namespace bbopt
