#include "tet/text/embedding_cache.hpp"

#include "tet/numeric/bytes.hpp"

#include <stdexcept>

namespace tet {

void EmbeddingCache::add(std::string snippet_id, const RowVec& vector) {
  if (vector.size() != static_cast<Eigen::Index>(d_llm_)) {
    throw std::invalid_argument("embedding for '" + snippet_id + "' has width " + std::to_string(vector.size()) +
                                ", cache width is " + std::to_string(d_llm_));
  }
  if (index_.count(snippet_id)) throw std::invalid_argument("duplicate snippet_id '" + snippet_id + "'");
  index_.emplace(snippet_id, ids_.size());
  ids_.push_back(std::move(snippet_id));
  rows_.push_back(vector);
}

const RowVec& EmbeddingCache::at(const std::string& snippet_id) const {
  const auto it = index_.find(snippet_id);
  if (it == index_.end()) throw std::out_of_range("no cached embedding for snippet '" + snippet_id + "'");
  return rows_[it->second];
}

bool EmbeddingCache::operator==(const EmbeddingCache& other) const {
  if (d_llm_ != other.d_llm_ || ids_ != other.ids_) return false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i] != other.rows_[i]) return false;
  }
  return true;
}

std::string encode_embedding_cache(const EmbeddingCache& cache) {
  std::string out = "TETE";
  bytes::put_uint<std::uint32_t>(out, kEmbeddingCacheVersion);
  bytes::put_uint<std::uint32_t>(out, cache.d_llm());
  bytes::put_uint<std::uint64_t>(out, cache.size());
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const auto& id = cache.ids()[i];
    if (id.size() > 0xFFFF) throw std::invalid_argument("snippet id too long: " + id);
    bytes::put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out += id;
    for (double v : cache.row(i)) bytes::put_f32(out, static_cast<float>(v));
  }
  return out;
}

EmbeddingCache decode_embedding_cache(const std::string& data) {
  bytes::Reader in(data);
  if (in.str(4, "magic") != "TETE") throw std::runtime_error("not an embedding cache (bad magic)");
  const auto version = in.uint<std::uint32_t>("version");
  if (version != kEmbeddingCacheVersion) {
    throw std::runtime_error("unsupported embedding cache version " + std::to_string(version));
  }
  const auto d = in.uint<std::uint32_t>("d_llm");
  const auto count = in.uint<std::uint64_t>("record count");
  EmbeddingCache cache(d);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::string id;
    RowVec v(d);
    try {
      const auto len = in.uint<std::uint16_t>("id length");
      id = in.str(len, "snippet id");
      for (std::uint32_t k = 0; k < d; ++k) v[k] = static_cast<double>(in.f32("embedding payload"));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("embedding record " + std::to_string(r) + (id.empty() ? "" : " ('" + id + "')") +
                               ": " + e.what());
    }
    try {
      cache.add(std::move(id), v);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("embedding record " + std::to_string(r) + ": " + e.what());
    }
  }
  if (!in.done()) throw std::runtime_error("trailing bytes after last embedding record");
  return cache;
}

EmbeddingCache load_embedding_cache(const std::filesystem::path& path) {
  return decode_embedding_cache(bytes::read_file(path));
}

void store_embedding_cache(const EmbeddingCache& cache, const std::filesystem::path& path) {
  bytes::write_file(path, encode_embedding_cache(cache));
}

}  // namespace tet
