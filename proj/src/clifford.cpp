#include "bbopt/clifford.hpp"

#include <cmath>
#include <string>

namespace bbopt {

namespace {

using G = Generator;

// Standard compilation with Y180 spelled as two Y90 pulses, since the
// generator set has no Y180.
const std::array<std::vector<Generator>, CliffordGroup::kSize> kWords = {{
    {G::I},
    {G::X180},
    {G::Y90, G::Y90},
    {G::Y90, G::Y90, G::X180},
    {G::X90, G::Y90},
    {G::X90, G::Ym90},
    {G::Xm90, G::Y90},
    {G::Xm90, G::Ym90},
    {G::Y90, G::X90},
    {G::Y90, G::Xm90},
    {G::Ym90, G::X90},
    {G::Ym90, G::Xm90},
    {G::X90},
    {G::Xm90},
    {G::Y90},
    {G::Ym90},
    {G::Xm90, G::Y90, G::X90},
    {G::Xm90, G::Ym90, G::X90},
    {G::X180, G::Y90},
    {G::X180, G::Ym90},
    {G::Y90, G::Y90, G::X90},
    {G::Y90, G::Y90, G::Xm90},
    {G::X90, G::Y90, G::X90},
    {G::Xm90, G::Y90, G::Xm90},
}};

}  // namespace

Gate2 ideal_gate(Generator g) {
  switch (g) {
    case G::I: return gates::identity();
    case G::X90: return gates::x90();
    case G::X180: return gates::x180();
    case G::Xm90: return gates::xm90();
    case G::Y90: return gates::y90();
    case G::Ym90: return gates::ym90();
  }
  return gates::identity();
}

const char* to_string(Generator g) {
  switch (g) {
    case G::I: return "I";
    case G::X90: return "X90";
    case G::X180: return "X180";
    case G::Xm90: return "X-90";
    case G::Y90: return "Y90";
    case G::Ym90: return "Y-90";
  }
  return "?";
}

bool equal_up_to_phase(const Gate2& a, const Gate2& b, double tol) {
  // |Tr(a^+ b)| = 2 iff b = e^{i phi} a for unitaries.
  return std::abs(std::abs((a.adjoint() * b).trace()) - 2.0) <= tol;
}

CliffordGroup::CliffordGroup() : words_(kWords) {
  for (std::size_t k = 0; k < kSize; ++k) {
    Gate2 u = Gate2::Identity();
    for (Generator g : words_[k]) u = ideal_gate(g) * u;
    ideal_[k] = u;
  }
  for (std::size_t a = 0; a < kSize; ++a)
    for (std::size_t b = a + 1; b < kSize; ++b)
      if (equal_up_to_phase(ideal_[a], ideal_[b]))
        throw InvariantError("Clifford elements " + std::to_string(a) + " and " + std::to_string(b) + " coincide");

  for (std::size_t a = 0; a < kSize; ++a) {
    for (std::size_t b = 0; b < kSize; ++b) {
      auto idx = find(ideal_[b] * ideal_[a]);
      if (!idx) throw InvariantError("Clifford composition is not closed");
      compose_[a][b] = *idx;
    }
    auto inv = find(ideal_[a].adjoint());
    if (!inv) throw InvariantError("Clifford inverse missing");
    inverse_[a] = *inv;
  }
}

const CliffordGroup& CliffordGroup::instance() {
  static const CliffordGroup group;
  return group;
}

std::optional<std::size_t> CliffordGroup::find(const Gate2& g) const {
  for (std::size_t k = 0; k < kSize; ++k)
    if (equal_up_to_phase(ideal_[k], g)) return k;
  return std::nullopt;
}

double CliffordGroup::mean_word_length() const {
  std::size_t total = 0;
  for (const auto& w : words_) total += w.size();
  return static_cast<double>(total) / kSize;
}

std::vector<Propagator> CliffordGroup::compile(const Propagator& x90) const {
  const int n = static_cast<int>(x90.rows());
  std::array<Propagator, 6> generators;
  for (int g = 0; g < 6; ++g) generators[g] = embed(ideal_gate(static_cast<Generator>(g)), n);
  generators[static_cast<int>(G::X90)] = x90;

  std::vector<Propagator> out;
  out.reserve(kSize);
  for (const auto& w : words_) {
    Propagator u = Propagator::Identity(n, n);
    for (Generator g : w) u = generators[static_cast<int>(g)] * u;
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace bbopt
