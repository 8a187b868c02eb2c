#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbopt {

/// Optimization variable. Length is fixed for the lifetime of a run.
using ParamVector = std::vector<double>;

/// Random stream used for perturbation draws and shot sampling.
using Rng = std::mt19937_64;

/// Black-box objective. Returns a (possibly noisy) loss value and may throw
/// on failure; estimators attach the probe index before rethrowing.
using Objective = std::function<double(std::span<const double>)>;

/// Raised when an objective call fails or returns a non-finite value.
class ObjectiveError : public std::runtime_error {
 public:
  ObjectiveError(std::size_t probe, const std::string& what)
      : std::runtime_error("objective failed at probe " + std::to_string(probe) + ": " + what),
        probe_(probe),
        reason_(what) {}

  std::size_t probe() const noexcept { return probe_; }
  /// Underlying failure message without the probe prefix.
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t probe_;
  std::string reason_;
};

/// Raised when an update receives non-finite input.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an internal invariant is violated (corrupted state, lookup failure).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Deterministic stream derived from (seed, stream). Distinct stream ids give
/// independent generators for the same seed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

}  // namespace bbopt
