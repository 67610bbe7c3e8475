#include "tet/numeric/checkpoint.hpp"

#include "tet/numeric/bytes.hpp"

#include <stdexcept>

namespace tet {

std::string encode_checkpoint(const std::vector<NamedTensor>& tensors) {
  std::string out = "TETP";
  bytes::put_uint<std::uint32_t>(out, kCheckpointVersion);
  bytes::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > 0xFFFF) throw std::invalid_argument("tensor name too long: " + name);
    if (t.shape.size() > 0xFF) throw std::invalid_argument("tensor rank too large: " + name);
    if (t.data.size() != t.size()) {
      throw ShapeError("tensor " + name + " payload length does not match its shape");
    }
    bytes::put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    bytes::put_uint<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) bytes::put_uint<std::uint32_t>(out, d);
    for (double v : t.data) bytes::put_f64(out, v);
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(const std::string& data) {
  bytes::Reader in(data);
  if (in.str(4, "magic") != "TETP") throw std::runtime_error("not a checkpoint file (bad magic)");
  const auto version = in.uint<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = in.uint<std::uint32_t>("tensor count");
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    const auto len = in.uint<std::uint16_t>("name length");
    nt.name = in.str(len, "tensor name");
    const auto rank = in.uint<std::uint8_t>("rank");
    for (std::uint8_t r = 0; r < rank; ++r) nt.tensor.shape.push_back(in.uint<std::uint32_t>("dimension"));
    const auto n = nt.tensor.size();
    nt.tensor.data.resize(n);
    for (std::size_t k = 0; k < n; ++k) nt.tensor.data[k] = in.f64("tensor payload");
    out.push_back(std::move(nt));
  }
  if (!in.done()) throw std::runtime_error("trailing bytes after last checkpoint tensor");
  return out;
}

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  bytes::write_file(path, encode_checkpoint(tensors));
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(bytes::read_file(path));
}

const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& nt : tensors) {
    if (nt.name == name) return nt.tensor;
  }
  throw std::runtime_error("checkpoint has no tensor named " + name);
}

}  // namespace tet
