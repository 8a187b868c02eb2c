#include "bbopt/rb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "bbopt/clifford.hpp"

namespace bbopt {

const std::vector<std::size_t>& default_rb_lengths() {
  static const std::vector<std::size_t> lengths = {0,   1,   2,   3,   4,   5,   6,    8,    11,   14,
                                                   19,  25,  32,  42,  55,  72,  93,   122,  159,  208,
                                                   272, 355, 463, 605, 790, 1032, 1347, 1759, 2297, 3000};
  return lengths;
}

RbData run_rb(const Propagator& gate_under_test, const RbSettings& settings, Rng& rng) {
  if (settings.n_sequences == 0) throw std::invalid_argument("run_rb: n_sequences must be >= 1");
  if (gate_under_test.rows() < 2 || gate_under_test.rows() != gate_under_test.cols())
    throw std::invalid_argument("run_rb: gate must be a square propagator");

  const auto& group = CliffordGroup::instance();
  const std::vector<Propagator> cliffords = group.compile(gate_under_test);
  const int n = static_cast<int>(gate_under_test.rows());
  std::uniform_int_distribution<std::size_t> pick(0, CliffordGroup::kSize - 1);

  RbData data;
  data.lengths = settings.lengths;
  QuantumState psi(n), tmp(n);
  std::vector<double> samples(settings.n_sequences);

  for (std::size_t m : settings.lengths) {
    for (std::size_t s = 0; s < settings.n_sequences; ++s) {
      psi = ground_state(n);
      std::size_t net = 0;  // ideal composite so far
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t c = pick(rng);
        tmp.noalias() = cliffords[c] * psi;
        psi.swap(tmp);
        net = group.compose(net, c);
        if (settings.interleaved) {
          tmp.noalias() = gate_under_test * psi;
          psi.swap(tmp);
          net = group.compose(net, CliffordGroup::kX90);
        }
      }
      const std::size_t recovery = group.inverse(net);
      if (group.compose(net, recovery) != 0) throw InvariantError("run_rb: recovery lookup failed");
      tmp.noalias() = cliffords[recovery] * psi;
      psi.swap(tmp);
      samples[s] = measure_population(psi, settings.shots, rng).ground;
    }
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    data.survival.push_back(mean);
    data.survival_std.push_back(samples.size() > 1 ? std::sqrt(var / static_cast<double>(samples.size() - 1)) : 0.0);
  }
  return data;
}

namespace {

struct Residuals {
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  double cost = 0.0;
};

Residuals residuals(const RbData& data, const Eigen::Vector3d& x) {
  const auto count = static_cast<Eigen::Index>(data.lengths.size());
  Residuals out{Eigen::VectorXd(count), Eigen::MatrixXd(count, 3)};
  for (Eigen::Index i = 0; i < count; ++i) {
    const double m = static_cast<double>(data.lengths[i]);
    const double pm = std::pow(x(2), m);
    out.r(i) = x(0) * pm + x(1) - data.survival[i];
    out.jac(i, 0) = pm;
    out.jac(i, 1) = 1.0;
    out.jac(i, 2) = m == 0.0 ? 0.0 : x(0) * m * std::pow(x(2), m - 1.0);
  }
  out.cost = out.r.squaredNorm();
  return out;
}

constexpr double kMaxDecay = 1.0;
constexpr double kMinDecay = 1e-9;

// Survival probabilities keep A and B in [0, 1]; without the box a curve
// that has not reached its asymptote drifts to A -> inf, decay -> 1.
constexpr double kLower[3] = {0.0, 0.0, kMinDecay};
constexpr double kUpper[3] = {1.0, 1.0, kMaxDecay};

Eigen::Vector3d project(Eigen::Vector3d x) {
  for (int k = 0; k < 3; ++k) x(k) = std::clamp(x(k), kLower[k], kUpper[k]);
  return x;
}

// Parameters sitting on a bound with the descent direction pointing out of
// the box are frozen for this step.
std::array<bool, 3> active_bounds(const Eigen::Vector3d& x, const Eigen::Vector3d& grad) {
  std::array<bool, 3> active{};
  for (int k = 0; k < 3; ++k)
    active[k] = (x(k) <= kLower[k] && grad(k) > 0.0) || (x(k) >= kUpper[k] && grad(k) < 0.0);
  return active;
}

}  // namespace

RbFitResult fit_rb_decay(const RbData& data) {
  if (data.lengths.size() != data.survival.size()) throw std::invalid_argument("fit_rb_decay: size mismatch");
  if (std::set<std::size_t>(data.lengths.begin(), data.lengths.end()).size() < 3)
    throw std::invalid_argument("fit_rb_decay: need at least three distinct lengths");
  for (double y : data.survival)
    if (!std::isfinite(y)) throw FitError("fit_rb_decay: non-finite survival", 0.0);

  const auto [lo, hi] = std::minmax_element(data.survival.begin(), data.survival.end());
  if (*hi - *lo <= 1e-12) {
    RbFitResult flat;
    flat.amplitude = 0.0;
    flat.offset = *lo;
    flat.decay_rate = 1.0;
    flat.degenerate = true;
    return flat;
  }

  Eigen::Vector3d x(0.5, 0.5, 0.99);
  Residuals cur = residuals(data, x);
  double damping = 1e-3;
  int iter = 0;
  bool converged = false;
  constexpr int kMaxIter = 1000;

  for (; iter < kMaxIter && !converged; ++iter) {
    const Eigen::Matrix3d jtj = cur.jac.transpose() * cur.jac;
    const Eigen::Vector3d grad = cur.jac.transpose() * cur.r;
    const auto active = active_bounds(x, grad);
    Eigen::Matrix3d lhs = jtj;
    Eigen::Vector3d rhs = -grad;
    for (int k = 0; k < 3; ++k) {
      lhs(k, k) += damping * std::max(jtj(k, k), 1e-30);
      if (active[k]) {
        lhs.row(k).setZero();
        lhs.col(k).setZero();
        lhs(k, k) = 1.0;
        rhs(k) = 0.0;
      }
    }
    const Eigen::Vector3d step = lhs.ldlt().solve(rhs);

    const Eigen::Vector3d trial = project(x + step);
    Residuals next = residuals(data, trial);
    if (next.cost < cur.cost) {
      const double drop = cur.cost - next.cost;
      const double moved = (trial - x).cwiseAbs().maxCoeff();
      x = trial;
      cur = std::move(next);
      damping = std::max(damping / 10.0, 1e-12);
      if (drop <= 1e-10 * cur.cost + 1e-30 || moved <= 1e-10 * (1.0 + x.cwiseAbs().maxCoeff())) converged = true;
    } else {
      damping *= 10.0;
      // No descent direction left at machine precision.
      if (damping > 1e12) converged = true;
    }
  }

  const auto count = static_cast<double>(data.lengths.size());
  const double rms = std::sqrt(cur.cost / count);
  if (!converged) throw FitError("fit_rb_decay: no convergence after " + std::to_string(kMaxIter) + " iterations", rms);

  RbFitResult fit;
  fit.amplitude = x(0);
  fit.offset = x(1);
  fit.decay_rate = x(2);
  fit.residual_rms = rms;
  fit.iterations = iter;

  const Eigen::Matrix3d jtj = cur.jac.transpose() * cur.jac;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
  if (lu.rank() < 3 || std::abs(fit.amplitude) < 1e-9) {
    fit.degenerate = true;
  } else if (count > 3.0) {
    const double sigma2 = cur.cost / (count - 3.0);
    const Eigen::Matrix3d cov = sigma2 * lu.inverse();
    fit.amplitude_se = std::sqrt(std::max(cov(0, 0), 0.0));
    fit.offset_se = std::sqrt(std::max(cov(1, 1), 0.0));
    fit.decay_rate_se = std::sqrt(std::max(cov(2, 2), 0.0));
  }
  return fit;
}

InterleavedFidelity interleaved_gate_fidelity(double p_ref, double p_int, double tolerance) {
  if (!(p_ref > 0.0 && p_ref <= kMaxDecay) || !(p_int > 0.0 && p_int <= kMaxDecay))
    throw std::invalid_argument("interleaved_gate_fidelity: decay rates must be in (0, 1]");
  return {1.0 - (1.0 - p_int / p_ref) / 2.0, p_int > p_ref + tolerance};
}

}  // namespace bbopt
