#pragma once

#include <complex>
#include <cstddef>
#include <numbers>

#include <Eigen/Dense>

#include "bbopt/common.hpp"
#include "bbopt/pulse.hpp"

namespace bbopt {

using Complex = std::complex<double>;
using Propagator = Eigen::MatrixXcd;
using QuantumState = Eigen::VectorXcd;
using Gate2 = Eigen::Matrix2cd;

/// Driven transmon in the frame rotating at the 0-1 transition, resonant drive,
/// rotating-wave approximation. Frequencies are angular, rad/ns.
///
///   H(t) = -(alpha/2) a+ a+ a a + (drive_scale/2) (I(t) (a + a+) + Q(t) i (a+ - a))
struct TransmonParams {
  int n_levels = 3;
  double anharmonicity = 2.0 * std::numbers::pi * 0.320;
  /// Rabi angular frequency produced by unit drive amplitude.
  double drive_scale = 2.0 * std::numbers::pi * 0.025;

  void check() const;

  static double from_mhz(double mhz) { return 2.0 * std::numbers::pi * mhz * 1e-3; }
};

/// Hamiltonian for one piecewise-constant segment.
Eigen::MatrixXcd segment_hamiltonian(double i_amp, double q_amp, const TransmonParams& params);

/// Time-ordered product of per-segment exponentials exp(-i H_k dt).
/// Throws NumericError when the result drifts from unitarity by more than 1e-8.
Propagator evolve(const PulseSequence& pulse, const TransmonParams& params);

/// max |U+U - I|.
double unitarity_error(const Propagator& u);

/// 2x2 unitary embedded in the n-level space, identity on levels >= 2.
Propagator embed(const Gate2& g, int n_levels);

/// Ideal rotation exp(-i angle/2 (cos(phi) X + sin(phi) Y)).
Gate2 rotation(double angle, double phi);

namespace gates {
Gate2 identity();
Gate2 x90();
Gate2 x180();
Gate2 xm90();
Gate2 y90();
Gate2 y180();
Gate2 ym90();
}  // namespace gates

/// |0> in the n-level space.
QuantumState ground_state(int n_levels);

struct PopulationEstimate {
  double excited = 0.0;  // |1> population
  double leakage = 0.0;  // population of levels >= 2
  double ground = 0.0;
};

/// Exact populations when shots == 0, otherwise multinomial frequencies over
/// all levels from `shots` trials.
PopulationEstimate measure_population(const QuantumState& state, std::size_t shots, Rng& rng);
PopulationEstimate exact_population(const QuantumState& state);

/// Average gate fidelity of the computational block:
/// M = u_ideal^+ u_sim[0:2, 0:2], F = (Tr(M^+ M) + |Tr M|^2) / 6.
double average_gate_fidelity(const Propagator& u_sim, const Gate2& u_ideal);

}  // namespace bbopt
