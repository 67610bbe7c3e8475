#include "tet/model/features.hpp"

#include "tet/text/snippet_pool.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace tet {

RowVec raw_aggregates(const HorizonView& view, int vocab_size) {
  RowVec out = RowVec::Zero(vocab_size + 2);
  std::set<long long> days;
  for (const auto& ev : view.events) {
    out[ev.event_type] += 1.0;
    days.insert(static_cast<long long>(std::floor(ev.timestamp / kSecondsPerDay)));
  }
  out[vocab_size] = static_cast<double>(days.size());
  out[vocab_size + 1] = static_cast<double>(view.events.size());
  return out;
}

FeaturePipeline FeaturePipeline::fit(std::span<const HorizonView> train, int vocab_size,
                                     const EmbeddingCache& cache, const PreprocessConfig& config) {
  if (train.empty()) throw std::invalid_argument("cannot fit preprocessing on an empty training split");
  FeaturePipeline p;
  p.vocab_size_ = vocab_size;
  p.max_seq_len_ = config.max_seq_len;
  p.d_llm_ = static_cast<int>(cache.d_llm());
  p.topic_count_ = config.topics;
  p.edges_ = calibrate_buckets(train, config.bins);

  const int width = p.aggregate_width();
  Mat agg(static_cast<Eigen::Index>(train.size()), width);
  for (std::size_t i = 0; i < train.size(); ++i) agg.row(static_cast<Eigen::Index>(i)) = raw_aggregates(train[i], vocab_size);
  p.agg_mean_ = agg.colwise().mean();
  p.agg_scale_ = RowVec(width);
  for (int c = 0; c < width; ++c) {
    const double sd = std::sqrt((agg.col(c).array() - p.agg_mean_[c]).square().mean());
    p.agg_scale_[c] = sd > 0.0 ? sd : 1.0;
  }

  std::vector<std::string> ids;
  for (const auto& v : train) ids.insert(ids.end(), v.snippet_ids.begin(), v.snippet_ids.end());
  const Mat vectors = gather_snippets(cache, ids);
  if (count_distinct_rows(vectors) >= static_cast<std::size_t>(config.topics)) {
    p.topics_ = fit_topics(vectors, config.topics, config.topic_seed);
  }
  return p;
}

Example FeaturePipeline::transform(const HorizonView& view, const EmbeddingCache& cache) const {
  Example ex;
  ex.enrollment_id = view.enrollment_id;
  ex.label = view.label;
  ex.tokens = tokenize_events(view, edges_, max_seq_len_, vocab_size_);
  ex.aggregates = (raw_aggregates(view, vocab_size_) - agg_mean_).cwiseQuotient(agg_scale_);
  ex.text_missing = view.text_missing || !topics_.has_value();
  if (ex.text_missing) {
    ex.theta = RowVec::Zero(topic_count_);
    ex.mean_embedding = RowVec::Zero(d_llm_);
  } else {
    ex.snippets = gather_snippets(cache, view.snippet_ids);
    ex.theta = topic_distribution(ex.snippets, *topics_);
    ex.mean_embedding = ex.snippets.colwise().mean();
  }
  return ex;
}

std::vector<Example> FeaturePipeline::transform(std::span<const HorizonView> views, const EmbeddingCache& cache) const {
  std::vector<Example> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back(transform(v, cache));
  return out;
}

std::vector<NamedTensor> FeaturePipeline::to_tensors() const {
  std::vector<NamedTensor> out;
  out.push_back({"bucket_edges", Tensor::from_vector(edges_.edges)});
  out.push_back({"bucket_max_gap", Tensor::from_vector({edges_.max_gap})});
  out.push_back({"preprocess_dims", Tensor::from_vector({static_cast<double>(vocab_size_),
                                                         static_cast<double>(max_seq_len_),
                                                         static_cast<double>(d_llm_),
                                                         static_cast<double>(topic_count_)})});
  out.push_back({"aggregate_mean", Tensor::from_matrix<double>(Mat(agg_mean_))});
  out.push_back({"aggregate_scale", Tensor::from_matrix<double>(Mat(agg_scale_))});
  if (topics_) {
    out.push_back({"topic_centroids", Tensor::from_matrix<double>(topics_->centroids)});
    out.push_back({"topic_temperature", Tensor::from_vector({topics_->temperature})});
  }
  return out;
}

FeaturePipeline FeaturePipeline::from_tensors(const std::vector<NamedTensor>& tensors) {
  FeaturePipeline p;
  p.edges_.edges = find_tensor(tensors, "bucket_edges").data;
  p.edges_.max_gap = find_tensor(tensors, "bucket_max_gap").data.at(0);
  const auto& dims = find_tensor(tensors, "preprocess_dims").data;
  if (dims.size() != 4) throw std::runtime_error("malformed preprocess_dims tensor");
  p.vocab_size_ = static_cast<int>(dims[0]);
  p.max_seq_len_ = static_cast<int>(dims[1]);
  p.d_llm_ = static_cast<int>(dims[2]);
  p.topic_count_ = static_cast<int>(dims[3]);
  p.agg_mean_ = find_tensor(tensors, "aggregate_mean").to_matrix().row(0);
  p.agg_scale_ = find_tensor(tensors, "aggregate_scale").to_matrix().row(0);
  for (const auto& nt : tensors) {
    if (nt.name == "topic_centroids") {
      TopicModel tm;
      tm.centroids = nt.tensor.to_matrix();
      tm.temperature = find_tensor(tensors, "topic_temperature").data.at(0);
      p.topics_ = std::move(tm);
    }
  }
  return p;
}

}  // namespace tet
