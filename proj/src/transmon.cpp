#include "bbopt/transmon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bbopt {

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::MatrixXcd lowering(int n) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

}  // namespace

void TransmonParams::check() const {
  if (n_levels < 2 || n_levels > 4) throw std::invalid_argument("n_levels must be 2, 3 or 4");
  if (!(anharmonicity > 0.0)) throw std::invalid_argument("anharmonicity must be positive");
  if (!(drive_scale > 0.0)) throw std::invalid_argument("drive_scale must be positive");
}

Eigen::MatrixXcd segment_hamiltonian(double i_amp, double q_amp, const TransmonParams& params) {
  const int n = params.n_levels;
  const Eigen::MatrixXcd a = lowering(n);
  const Eigen::MatrixXcd ad = a.adjoint();
  Eigen::MatrixXcd h = 0.5 * params.drive_scale * (i_amp * (a + ad) + q_amp * kI * (ad - a));
  for (int k = 0; k < n; ++k) h(k, k) += -0.5 * params.anharmonicity * k * (k - 1);
  return h;
}

Propagator evolve(const PulseSequence& pulse, const TransmonParams& params) {
  params.check();
  if (pulse.q_samples.size() != pulse.i_samples.size()) throw std::invalid_argument("I/Q sample count mismatch");
  const int n = params.n_levels;
  Propagator u = Propagator::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(n);
  Propagator step(n, n);
  Propagator next(n, n);
  for (std::size_t k = 0; k < pulse.size(); ++k) {
    const double ia = pulse.i_samples[k];
    const double qa = pulse.q_samples[k];
    if (!std::isfinite(ia) || !std::isfinite(qa)) throw NumericError("non-finite pulse sample " + std::to_string(k));
    solver.compute(segment_hamiltonian(ia, qa, params));
    const auto& vecs = solver.eigenvectors();
    Eigen::VectorXcd phases(n);
    for (int j = 0; j < n; ++j) phases(j) = std::exp(-kI * solver.eigenvalues()(j) * pulse.dt_ns);
    step.noalias() = vecs * phases.asDiagonal() * vecs.adjoint();
    next.noalias() = step * u;
    u.swap(next);
  }
  const double drift = unitarity_error(u);
  if (drift > 1e-8) throw NumericError("propagator unitarity drift " + std::to_string(drift));
  return u;
}

double unitarity_error(const Propagator& u) {
  return (u.adjoint() * u - Propagator::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

Propagator embed(const Gate2& g, int n_levels) {
  Propagator out = Propagator::Identity(n_levels, n_levels);
  out.topLeftCorner<2, 2>() = g;
  return out;
}

Gate2 rotation(double angle, double phi) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  Gate2 g;
  g << c, -kI * s * std::exp(-kI * phi), -kI * s * std::exp(kI * phi), c;
  return g;
}

namespace gates {
Gate2 identity() { return Gate2::Identity(); }
Gate2 x90() { return rotation(std::numbers::pi / 2, 0.0); }
Gate2 x180() { return rotation(std::numbers::pi, 0.0); }
Gate2 xm90() { return rotation(-std::numbers::pi / 2, 0.0); }
Gate2 y90() { return rotation(std::numbers::pi / 2, std::numbers::pi / 2); }
Gate2 y180() { return rotation(std::numbers::pi, std::numbers::pi / 2); }
Gate2 ym90() { return rotation(-std::numbers::pi / 2, std::numbers::pi / 2); }
}  // namespace gates

QuantumState ground_state(int n_levels) {
  QuantumState psi = QuantumState::Zero(n_levels);
  psi(0) = 1.0;
  return psi;
}

PopulationEstimate exact_population(const QuantumState& state) {
  PopulationEstimate p;
  p.ground = std::norm(state(0));
  p.excited = std::norm(state(1));
  for (Eigen::Index k = 2; k < state.size(); ++k) p.leakage += std::norm(state(k));
  return p;
}

PopulationEstimate measure_population(const QuantumState& state, std::size_t shots, Rng& rng) {
  PopulationEstimate exact = exact_population(state);
  if (shots == 0) return exact;

  const double total = exact.ground + exact.excited + exact.leakage;
  const double p0 = std::clamp(exact.ground / total, 0.0, 1.0);
  const double p1 = std::clamp(exact.excited / total, 0.0, 1.0);

  const auto n = static_cast<long long>(shots);
  const long long n0 = std::binomial_distribution<long long>(n, p0)(rng);
  const double p1_rest = p0 < 1.0 ? std::clamp(p1 / (1.0 - p0), 0.0, 1.0) : 0.0;
  const long long n1 = std::binomial_distribution<long long>(n - n0, p1_rest)(rng);

  const double inv = 1.0 / static_cast<double>(shots);
  return {static_cast<double>(n1) * inv, static_cast<double>(n - n0 - n1) * inv, static_cast<double>(n0) * inv};
}

double average_gate_fidelity(const Propagator& u_sim, const Gate2& u_ideal) {
  if (u_sim.rows() < 2 || u_sim.cols() != u_sim.rows()) throw std::invalid_argument("propagator must be square, n >= 2");
  const Gate2 m = u_ideal.adjoint() * u_sim.topLeftCorner<2, 2>();
  const double tr_mm = (m.adjoint() * m).trace().real();
  return (tr_mm + std::norm(m.trace())) / 6.0;
}

}  // namespace bbopt
