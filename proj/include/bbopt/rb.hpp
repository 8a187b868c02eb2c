#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbopt/common.hpp"
#include "bbopt/transmon.hpp"

namespace bbopt {

/// Clifford counts used for the fine-tuning decay curves.
const std::vector<std::size_t>& default_rb_lengths();

struct RbSettings {
  std::vector<std::size_t> lengths = default_rb_lengths();
  std::size_t n_sequences = 10;
  /// 0 = exact ground-state population.
  std::size_t shots = 0;
  /// Insert the gate under test after every random Clifford.
  bool interleaved = false;
};

/// Mean ground-state survival per sequence length.
struct RbData {
  std::vector<std::size_t> lengths;
  std::vector<double> survival;
  std::vector<double> survival_std;  // spread across sequences
};

/// Single-qubit Clifford RB where X90 is the simulated gate under test and
/// every other generator is ideal. Random sequences, recovery elements and
/// shot noise are drawn from rng.
RbData run_rb(const Propagator& gate_under_test, const RbSettings& settings, Rng& rng);

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double residual_rms)
      : std::runtime_error(what + " (residual rms " + std::to_string(residual_rms) + ")"), residual_rms(residual_rms) {}
  double residual_rms;
};

/// Least-squares fit of survival = A * decay^m + B.
struct RbFitResult {
  double amplitude = 0.0;
  double offset = 0.0;
  double decay_rate = 1.0;
  double amplitude_se = 0.0;
  double offset_se = 0.0;
  double decay_rate_se = 0.0;
  double residual_rms = 0.0;
  /// Set when the data cannot separate A and B from the decay (flat curve).
  bool degenerate = false;
  int iterations = 0;
};

/// Levenberg-Marquardt from A = 0.5, B = 0.5, decay = 0.99, with A and B
/// kept in [0, 1] and decay in (0, 1]. Needs at least
/// three distinct lengths. Throws FitError on non-convergence.
RbFitResult fit_rb_decay(const RbData& data);

struct InterleavedFidelity {
  double fidelity = 1.0;
  /// Interleaved decay exceeds the reference decay by more than tolerance.
  bool warning = false;
};

/// 1 - (1 - p_int / p_ref) / 2.
InterleavedFidelity interleaved_gate_fidelity(double p_ref, double p_int, double tolerance = 0.0);

}  // namespace bbopt
