#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bbopt/transmon.hpp"

namespace bbopt {

/// Physical pulses the single-qubit Clifford group is compiled into.
enum class Generator { I, X90, X180, Xm90, Y90, Ym90 };

Gate2 ideal_gate(Generator g);
const char* to_string(Generator g);

/// The 24-element single-qubit Clifford group, each element written as a
/// word over {I, X90, X180, X-90, Y90, Y-90} applied left to right.
/// Composition and inversion are table lookups on ideal unitaries.
class CliffordGroup {
 public:
  static constexpr std::size_t kSize = 24;
  /// Index of the element compiled to a single X90 pulse.
  static constexpr std::size_t kX90 = 12;

  /// Builds the group and its tables. Throws InvariantError if the
  /// decomposition does not close into a group.
  CliffordGroup();

  static const CliffordGroup& instance();

  const std::vector<Generator>& word(std::size_t idx) const { return words_[idx]; }
  const Gate2& ideal(std::size_t idx) const { return ideal_[idx]; }

  /// Index of "first a, then b".
  std::size_t compose(std::size_t a, std::size_t b) const { return compose_[a][b]; }
  std::size_t inverse(std::size_t a) const { return inverse_[a]; }

  /// Element equal to g up to global phase (tolerance 1e-9).
  std::optional<std::size_t> find(const Gate2& g) const;

  /// Average number of physical pulses per element, I counted as one.
  double mean_word_length() const;

  /// Compiles each element to an n-level propagator; X90 pulses use
  /// `x90`, the other generators are ideal and embedded.
  std::vector<Propagator> compile(const Propagator& x90) const;

 private:
  std::array<std::vector<Generator>, kSize> words_;
  std::array<Gate2, kSize> ideal_;
  std::array<std::array<std::size_t, kSize>, kSize> compose_{};
  std::array<std::size_t, kSize> inverse_{};
};

/// True if a and b differ only by a global phase.
bool equal_up_to_phase(const Gate2& a, const Gate2& b, double tol = 1e-9);

}  // namespace bbopt
