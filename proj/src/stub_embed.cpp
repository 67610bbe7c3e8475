#include "tet/text/stub_embed.hpp"

#include <cmath>
#include <numbers>

namespace tet {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RowVec stub_embed(std::string_view text, std::uint32_t d_llm) {
  SplitMix64 gen(fnv1a64(text));
  RowVec v(d_llm);
  for (std::uint32_t k = 0; k < d_llm; k += 2) {
    const double u1 = (static_cast<double>(gen.next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen.next() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[k] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (k + 1 < d_llm) v[k + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

}  // namespace tet
