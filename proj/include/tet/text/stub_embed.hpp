#pragma once

#include "tet/text/embedding_cache.hpp"

#include <cstdint>
#include <string_view>

namespace tet {

std::uint64_t fnv1a64(std::string_view bytes);

/// SplitMix64 generator; the exact stream is part of the stub contract.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// Deterministic unit-norm stand-in for a text encoder.
///
/// Seed = FNV-1a 64 of the UTF-8 bytes. Normals come in Box-Muller pairs from
/// two consecutive SplitMix64 outputs a, b:
///   u1 = ((a >> 11) + 1) * 2^-53,  u2 = (b >> 11) * 2^-53,
///   r = sqrt(-2 ln u1),  n0 = r cos(2 pi u2),  n1 = r sin(2 pi u2).
/// The vector is L2-normalized in double; cache files store it as float32.
RowVec stub_embed(std::string_view text, std::uint32_t d_llm);

}  // namespace tet
