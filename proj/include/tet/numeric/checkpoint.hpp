#pragma once

#include "tet/numeric/tensor.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tet {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Binary layout, little-endian:
//   "TETP" | version u32 | count u32 |
//   per tensor: name_len u16 | name bytes | rank u8 | dims u32 x rank | f64 payload
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

/// Looks up a tensor by name, throwing if absent.
const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);

}  // namespace tet
