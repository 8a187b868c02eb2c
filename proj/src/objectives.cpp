#include "bbopt/objectives.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bbopt {

void ObjectiveConfig::check() const {
  transmon.check();
  if (k_list.empty()) throw std::invalid_argument("k_list must not be empty");
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    if (k_list[i] < 1) throw std::invalid_argument("k_list entries must be positive");
    if (i > 0 && k_list[i] <= k_list[i - 1]) throw std::invalid_argument("k_list must be strictly increasing");
  }
  if (base.size() != kPulseDim) throw std::invalid_argument("base must have 20 entries");
  for (std::size_t i = 0; i < active_dims.size(); ++i) {
    if (active_dims[i] >= kPulseDim)
      throw std::invalid_argument("active_dims index out of range: " + std::to_string(active_dims[i]));
    for (std::size_t j = 0; j < i; ++j)
      if (active_dims[j] == active_dims[i])
        throw std::invalid_argument("active_dims repeats index " + std::to_string(active_dims[i]));
  }
}

HannPulseParams ObjectiveConfig::expand(std::span<const double> theta) const {
  if (theta.size() != dim())
    throw std::invalid_argument("parameter vector has " + std::to_string(theta.size()) + " entries, expected " +
                                std::to_string(dim()));
  if (active_dims.empty()) return HannPulseParams::from_vector(theta, duration_ns, dt_ns);
  std::vector<double> full = base;
  for (std::size_t i = 0; i < active_dims.size(); ++i) full[active_dims[i]] = theta[i];
  return HannPulseParams::from_vector(full, duration_ns, dt_ns);
}

Propagator hann_gate(const HannPulseParams& ab, const ObjectiveConfig& cfg) {
  return evolve(apply_distortion(hann_waveform(ab), cfg.distortion_fir), cfg.transmon);
}

double ideal_target_x(int k) {
  if (k < 1) throw std::invalid_argument("repetition count must be positive");
  const double s = std::sin((k + 1) * std::numbers::pi / 4.0);
  // Snap to the exact values 0, 1/2, 1.
  return std::round(2.0 * s * s) / 2.0;
}

double ideal_target_y(int) { return 0.5; }

namespace {

LossValue repeated_gate_loss(const Propagator& gate, const Gate2& reference, double (*target)(int),
                             const ObjectiveConfig& cfg, Rng& rng) {
  const int n = static_cast<int>(gate.rows());
  QuantumState psi = embed(reference, n) * ground_state(n);
  QuantumState tmp(n);
  int applied = 0;
  double sum = 0.0;
  for (int k : cfg.k_list) {
    for (; applied < k; ++applied) {
      tmp.noalias() = gate * psi;
      psi.swap(tmp);
    }
    sum += std::abs(target(k) - measure_population(psi, cfg.shots, rng).excited);
  }
  return {sum / static_cast<double>(cfg.k_list.size()), cfg.k_list.size(), std::nullopt, std::nullopt};
}

}  // namespace

LossValue loss_x(const Propagator& gate, const ObjectiveConfig& cfg, Rng& rng) {
  LossValue out = repeated_gate_loss(gate, gates::x90(), ideal_target_x, cfg, rng);
  out.lx = out.value;
  return out;
}

LossValue loss_y(const Propagator& gate, const ObjectiveConfig& cfg, Rng& rng) {
  LossValue out = repeated_gate_loss(gate, gates::y90(), ideal_target_y, cfg, rng);
  out.ly = out.value;
  return out;
}

LossValue loss_rb(const Propagator& gate, const ObjectiveConfig& cfg, Rng& rng) {
  RbSettings settings = cfg.rb;
  settings.interleaved = false;
  const RbData data = run_rb(gate, settings, rng);
  const RbFitResult fit = fit_rb_decay(data);
  return {(1.0 - fit.decay_rate) * 100.0, settings.lengths.size() * settings.n_sequences, std::nullopt, std::nullopt};
}

LossValue loss_x(const HannPulseParams& ab, const ObjectiveConfig& cfg, Rng& rng) {
  return loss_x(hann_gate(ab, cfg), cfg, rng);
}

LossValue loss_y(const HannPulseParams& ab, const ObjectiveConfig& cfg, Rng& rng) {
  return loss_y(hann_gate(ab, cfg), cfg, rng);
}

LossValue loss_combined(const HannPulseParams& ab, const ObjectiveConfig& cfg, Rng& rng) {
  const Propagator gate = hann_gate(ab, cfg);
  const LossValue x = loss_x(gate, cfg, rng);
  const LossValue y = loss_y(gate, cfg, rng);
  return {(x.value + y.value) / 2.0, x.n_calls + y.n_calls, x.value, y.value};
}

LossValue loss_rb(const HannPulseParams& ab, const ObjectiveConfig& cfg, Rng& rng) {
  return loss_rb(hann_gate(ab, cfg), cfg, rng);
}

LossKind parse_loss(std::string_view name) {
  if (name == "lx") return LossKind::lx;
  if (name == "ly") return LossKind::ly;
  if (name == "l_combined") return LossKind::l_combined;
  if (name == "l_rb") return LossKind::l_rb;
  if (name == "sphere") return LossKind::sphere;
  if (name == "shifted_quadratic") return LossKind::shifted_quadratic;
  if (name == "cubic") return LossKind::cubic;
  throw std::invalid_argument("unknown objective: " + std::string(name));
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::lx: return "lx";
    case LossKind::ly: return "ly";
    case LossKind::l_combined: return "l_combined";
    case LossKind::l_rb: return "l_rb";
    case LossKind::sphere: return "sphere";
    case LossKind::shifted_quadratic: return "shifted_quadratic";
    case LossKind::cubic: return "cubic";
  }
  return "?";
}

Objective make_pulse_objective(LossKind kind, ObjectiveConfig cfg, std::uint64_t seed, std::uint64_t stream) {
  cfg.check();
  auto rng = std::make_shared<Rng>(make_stream(seed, stream));
  auto shared_cfg = std::make_shared<const ObjectiveConfig>(std::move(cfg));
  switch (kind) {
    case LossKind::lx:
      return [shared_cfg, rng](std::span<const double> theta) {
        return loss_x(shared_cfg->expand(theta), *shared_cfg, *rng).value;
      };
    case LossKind::ly:
      return [shared_cfg, rng](std::span<const double> theta) {
        return loss_y(shared_cfg->expand(theta), *shared_cfg, *rng).value;
      };
    case LossKind::l_combined:
      return [shared_cfg, rng](std::span<const double> theta) {
        return loss_combined(shared_cfg->expand(theta), *shared_cfg, *rng).value;
      };
    case LossKind::l_rb:
      return [shared_cfg, rng](std::span<const double> theta) {
        return loss_rb(shared_cfg->expand(theta), *shared_cfg, *rng).value;
      };
    default: throw std::invalid_argument("not a pulse objective: " + std::string(to_string(kind)));
  }
}

namespace {

double synthetic_value(LossKind kind, std::span<const double> x) {
  double sum = 0.0;
  switch (kind) {
    case LossKind::sphere:
      for (double v : x) sum += v * v;
      return sum;
    case LossKind::shifted_quadratic:
      for (double v : x) sum += (v - 1.0) * (v - 1.0);
      return sum;
    case LossKind::cubic:
      for (double v : x) sum += v * v * v;
      return sum;
    default: throw std::invalid_argument("not a synthetic objective: " + std::string(to_string(kind)));
  }
}

}  // namespace

Objective synthetic_objective(LossKind kind, double noise_sigma, std::uint64_t seed, std::uint64_t stream) {
  synthetic_value(kind, {});
  if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (noise_sigma == 0.0) return [kind](std::span<const double> x) { return synthetic_value(kind, x); };
  auto rng = std::make_shared<Rng>(make_stream(seed, stream));
  return [kind, noise_sigma, rng](std::span<const double> x) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    return synthetic_value(kind, x) + noise(*rng);
  };
}

std::vector<double> synthetic_gradient(LossKind kind, std::span<const double> theta) {
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    switch (kind) {
      case LossKind::sphere: g[i] = 2.0 * theta[i]; break;
      case LossKind::shifted_quadratic: g[i] = 2.0 * (theta[i] - 1.0); break;
      case LossKind::cubic: g[i] = 3.0 * theta[i] * theta[i]; break;
      default: throw std::invalid_argument("not a synthetic objective: " + std::string(to_string(kind)));
    }
  }
  return g;
}

}  // namespace bbopt
