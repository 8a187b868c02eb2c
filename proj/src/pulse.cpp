#include "bbopt/pulse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bbopt {

HannPulseParams HannPulseParams::from_vector(std::span<const double> ab, double duration_ns, double dt_ns) {
  if (ab.size() != kPulseDim) throw std::invalid_argument("Hann parameters need 20 entries");
  HannPulseParams hp;
  for (std::size_t i = 0; i < kHannTerms; ++i) {
    hp.a[i] = ab[i];
    hp.b[i] = ab[kHannTerms + i];
  }
  hp.duration_ns = duration_ns;
  hp.dt_ns = dt_ns;
  return hp;
}

std::vector<double> HannPulseParams::to_vector() const {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double hann_value(std::span<const double, kHannTerms> coeffs, double t, double duration) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kHannTerms; ++i)
    sum += coeffs[i] * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) * t / duration));
  return sum;
}

PulseSequence hann_waveform(const HannPulseParams& hp) {
  if (!(hp.duration_ns > 0.0) || !(hp.dt_ns > 0.0)) throw std::invalid_argument("pulse duration and dt must be positive");
  const double ratio = hp.duration_ns / hp.dt_ns;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio) throw std::invalid_argument("dt must divide the pulse duration");

  const auto count = static_cast<std::size_t>(n);
  PulseSequence out{std::vector<double>(count), std::vector<double>(count), hp.dt_ns};
  for (std::size_t k = 0; k < count; ++k) {
    const double t = hp.dt_ns * (static_cast<double>(k) + 0.5);
    out.i_samples[k] = hann_value(hp.a, t, hp.duration_ns);
    out.q_samples[k] = hann_value(hp.b, t, hp.duration_ns);
  }
  return out;
}

PulseSequence apply_distortion(const PulseSequence& pulse, std::span<const double> fir) {
  if (fir.empty()) return pulse;
  PulseSequence out{std::vector<double>(pulse.size(), 0.0), std::vector<double>(pulse.size(), 0.0), pulse.dt_ns};
  for (std::size_t n = 0; n < pulse.size(); ++n) {
    for (std::size_t j = 0; j < fir.size() && j <= n; ++j) {
      out.i_samples[n] += fir[j] * pulse.i_samples[n - j];
      out.q_samples[n] += fir[j] * pulse.q_samples[n - j];
    }
  }
  return out;
}

}  // namespace bbopt
