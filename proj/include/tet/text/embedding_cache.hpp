#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tet {

using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

/// snippet_id -> fixed-width embedding. Values are held in double but the
/// on-disk payload is float32, so stored vectors round-trip at 32-bit
/// precision.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::uint32_t d_llm = 0) : d_llm_(d_llm) {}

  void add(std::string snippet_id, const RowVec& vector);
  bool contains(const std::string& snippet_id) const { return index_.count(snippet_id) > 0; }
  const RowVec& at(const std::string& snippet_id) const;

  std::uint32_t d_llm() const { return d_llm_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const RowVec& row(std::size_t i) const { return rows_[i]; }

  bool operator==(const EmbeddingCache& other) const;

 private:
  std::uint32_t d_llm_;
  std::vector<std::string> ids_;
  std::vector<RowVec> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary layout, little-endian:
//   "TETE" | version u32 | d_llm u32 | count u64 |
//   per record: id_len u16 | id bytes | d_llm x f32
inline constexpr std::uint32_t kEmbeddingCacheVersion = 1;

std::string encode_embedding_cache(const EmbeddingCache& cache);
EmbeddingCache decode_embedding_cache(const std::string& bytes);

EmbeddingCache load_embedding_cache(const std::filesystem::path& path);
void store_embedding_cache(const EmbeddingCache& cache, const std::filesystem::path& path);

}  // namespace tet
