#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace bbopt {

inline constexpr std::size_t kHannTerms = 10;
/// Pulse parameter layout: A_1..A_10 followed by B_1..B_10.
inline constexpr std::size_t kPulseDim = 2 * kHannTerms;

/// Coefficients of the raised-cosine basis 1 - cos(2 pi i t / T), i = 1..10,
/// on the in-phase (A) and quadrature (B) channels.
struct HannPulseParams {
  std::array<double, kHannTerms> a{};
  std::array<double, kHannTerms> b{};
  double duration_ns = 20.0;
  double dt_ns = 1.0;

  /// Builds from the 20-entry layout (A then B).
  static HannPulseParams from_vector(std::span<const double> ab, double duration_ns = 20.0, double dt_ns = 1.0);
  std::vector<double> to_vector() const;
};

/// Piecewise-constant I/Q samples in dimensionless amplitude units.
struct PulseSequence {
  std::vector<double> i_samples;
  std::vector<double> q_samples;
  double dt_ns = 1.0;

  std::size_t size() const { return i_samples.size(); }
};

/// Value of the Hann expansion at time t (continuous form).
double hann_value(std::span<const double, kHannTerms> coeffs, double t, double duration);

/// Samples I and Q at segment midpoints t = dt (k + 1/2), k = 0..T/dt - 1.
/// Throws std::invalid_argument when dt does not divide T.
PulseSequence hann_waveform(const HannPulseParams& hp);

/// Causal FIR filter y[n] = sum_j h[j] x[n-j] on both channels. Output has
/// the input length. Empty coefficients leave the pulse unchanged.
PulseSequence apply_distortion(const PulseSequence& pulse, std::span<const double> fir);

}  // namespace bbopt
