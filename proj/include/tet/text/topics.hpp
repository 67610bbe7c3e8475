#pragma once

#include "tet/numeric/tensor.hpp"
#include "tet/text/embedding_cache.hpp"

#include <cstdint>

namespace tet {

struct TopicModel {
  Mat centroids;  // K x d_llm
  double temperature = 1.0;

  int topics() const { return static_cast<int>(centroids.rows()); }
};

/// k-means with k-means++ seeding and a fixed 50 Lloyd iterations. The
/// temperature is the mean squared distance of each training vector to its
/// nearest centroid.
TopicModel fit_topics(const Mat& train_vectors, int k, std::uint64_t seed);

/// Mean over snippet rows of softmax_j(-|h - c_j|^2 / temperature).
RowVec topic_distribution(const Mat& snippet_vectors, const TopicModel& model);

std::size_t count_distinct_rows(const Mat& m);

/// The per-enrollment text summary entering fusion. When `missing`, both
/// vectors are exactly zero.
struct TextFeatures {
  RowVec pooled;
  RowVec theta;
  bool missing = true;
};

}  // namespace tet
