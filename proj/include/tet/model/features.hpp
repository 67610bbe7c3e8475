#pragma once

#include "tet/data/types.hpp"
#include "tet/encoder/behavior_encoder.hpp"
#include "tet/numeric/checkpoint.hpp"
#include "tet/text/embedding_cache.hpp"
#include "tet/text/topics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tet {

/// A horizon view turned into model inputs.
struct Example {
  std::string enrollment_id;
  double label = 0.0;
  EventTokens tokens;
  Mat snippets;           // k x d_llm, empty when text is missing
  bool text_missing = true;
  RowVec theta;           // K-simplex, zero when missing
  RowVec mean_embedding;  // d_llm, zero when missing
  RowVec aggregates;      // standardized order-invariant counts
};

/// Per-type counts, active days, total event count.
RowVec raw_aggregates(const HorizonView& view, int vocab_size);

struct PreprocessConfig {
  int bins = 16;
  int max_seq_len = 512;
  int topics = 6;
  std::uint64_t topic_seed = 17;
};

/// Every statistic here is estimated from the training split only.
class FeaturePipeline {
 public:
  static FeaturePipeline fit(std::span<const HorizonView> train, int vocab_size, const EmbeddingCache& cache,
                             const PreprocessConfig& config);

  Example transform(const HorizonView& view, const EmbeddingCache& cache) const;
  std::vector<Example> transform(std::span<const HorizonView> views, const EmbeddingCache& cache) const;

  /// Fixed topic count even when text is disabled.
  int topic_count() const { return topic_count_; }
  int vocab_size() const { return vocab_size_; }
  int d_llm() const { return d_llm_; }
  int aggregate_width() const { return vocab_size_ + 2; }
  bool text_enabled() const { return topics_.has_value(); }
  const BucketEdges& edges() const { return edges_; }
  const std::optional<TopicModel>& topic_model() const { return topics_; }

  std::vector<NamedTensor> to_tensors() const;
  static FeaturePipeline from_tensors(const std::vector<NamedTensor>& tensors);

 private:
  BucketEdges edges_;
  std::optional<TopicModel> topics_;
  RowVec agg_mean_;
  RowVec agg_scale_;
  int vocab_size_ = 0;
  int max_seq_len_ = 512;
  int d_llm_ = 0;
  int topic_count_ = 6;
};

}  // namespace tet
