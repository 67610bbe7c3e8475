#pragma once

#include "tet/encoder/behavior_encoder.hpp"
#include "tet/fusion/fusion_head.hpp"
#include "tet/model/features.hpp"
#include "tet/numeric/checkpoint.hpp"
#include "tet/text/snippet_pool.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tet {

enum class ModelKind { kAggregateFeatures, kTextOnly, kStaticMM, kBehaviorOnly, kFull };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct Ablations {
  bool mean_pooling = false;         // mean instead of attention pooling
  bool no_modality_dropout = false;
  bool mse_loss = false;             // log-variance frozen at 0

  bool operator==(const Ablations&) const = default;
};

struct ModelConfig {
  EncoderConfig encoder;
  FusionConfig fusion;
  int text_attention_dim = 16;
  Ablations ablations;
};

/// Input widths fixed by the data and preprocessing.
struct ModelDims {
  int vocab_size = 0;
  int d_llm = 0;
  int topics = 0;
  int aggregate_width = 0;

  static ModelDims from(const FeaturePipeline& p) {
    return {p.vocab_size(), p.d_llm(), p.topic_count(), p.aggregate_width()};
  }
};

/// Common interface of everything trained by the shared loop.
class Regressor {
 public:
  virtual ~Regressor() = default;

  /// Records one example; returns (raw mu, log-variance), both 1 x 1.
  virtual std::pair<VarD, VarD> forward(TapeD& tape, const Example& ex, bool train, Rng& rng) = 0;
  virtual std::vector<ParamD*> parameters() = 0;
  virtual ModelKind kind() const = 0;

  /// Sets the output-layer biases so that an untrained model predicts
  /// (mean, log_var) for every input.
  virtual void init_output_bias(double mean, double log_var) = 0;

  /// Evaluation-mode prediction with raw (unclamped) mean.
  GaussianPrediction predict(const Example& ex);

  std::vector<NamedTensor> param_tensors();
  void load_params(const std::vector<NamedTensor>& tensors);
  std::vector<Mat> snapshot();
  void restore(const std::vector<Mat>& values);
  void zero_grad();
};

/// Temporal encoder + text pooling + topics fused into the heteroscedastic
/// head. With kind == kBehaviorOnly the text path is never used.
class TetModel : public Regressor {
 public:
  TetModel(const ModelConfig& config, const ModelDims& dims, Rng& init_rng, ModelKind kind = ModelKind::kFull);

  std::pair<VarD, VarD> forward(TapeD& tape, const Example& ex, bool train, Rng& rng) override;
  std::vector<ParamD*> parameters() override;
  ModelKind kind() const override { return kind_; }
  void init_output_bias(double mean, double log_var) override { head.b2.value << mean, log_var; }

  BehaviorEncoder encoder;
  SnippetScorer scorer;
  FusionHead head;

 private:
  ModelConfig config_;
  ModelKind kind_;
};

/// Affine map from a fixed feature vector to (mu, log-variance).
class LinearRegressor : public Regressor {
 public:
  LinearRegressor(ModelKind kind, const ModelDims& dims, bool mse_loss, Rng& init_rng);

  std::pair<VarD, VarD> forward(TapeD& tape, const Example& ex, bool train, Rng& rng) override;
  std::vector<ParamD*> parameters() override { return {&weight, &bias}; }
  ModelKind kind() const override { return kind_; }
  void init_output_bias(double mean, double log_var) override { bias.value << mean, log_var; }

  ParamD weight, bias;

 private:
  ModelKind kind_;
  bool mse_loss_;
};

/// Aggregates + mean text embedding + missing bit through a 2-layer MLP.
class StaticMultimodal : public Regressor {
 public:
  StaticMultimodal(const FusionConfig& fusion, const ModelDims& dims, bool mse_loss, Rng& init_rng);

  std::pair<VarD, VarD> forward(TapeD& tape, const Example& ex, bool train, Rng& rng) override;
  std::vector<ParamD*> parameters() override { return {&w1, &b1, &w2, &b2}; }
  ModelKind kind() const override { return ModelKind::kStaticMM; }
  void init_output_bias(double mean, double log_var) override { b2.value << mean, log_var; }

  ParamD w1, b1, w2, b2;

 private:
  double p_drop_;
  bool mse_loss_;
};

/// Input vector of the fixed-feature baselines.
RowVec baseline_features(ModelKind kind, const Example& ex);

std::unique_ptr<Regressor> make_model(ModelKind kind, const ModelConfig& config, const ModelDims& dims,
                                      Rng& init_rng);

}  // namespace tet
