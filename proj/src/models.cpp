#include "tet/model/models.hpp"

#include "tet/numeric/init.hpp"

#include <stdexcept>

namespace tet {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kAggregateFeatures: return "aggregate_features";
    case ModelKind::kTextOnly: return "text_only";
    case ModelKind::kStaticMM: return "static_mm";
    case ModelKind::kBehaviorOnly: return "behavior_only";
    case ModelKind::kFull: return "full";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  for (auto k : {ModelKind::kAggregateFeatures, ModelKind::kTextOnly, ModelKind::kStaticMM,
                 ModelKind::kBehaviorOnly, ModelKind::kFull}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown model kind '" + name +
                              "' (expected aggregate_features, text_only, static_mm, behavior_only or full)");
}

GaussianPrediction Regressor::predict(const Example& ex) {
  TapeD tape;
  Rng unused(0);
  auto [mu, lv] = forward(tape, ex, false, unused);
  return {mu.scalar(), lv.scalar()};
}

std::vector<NamedTensor> Regressor::param_tensors() {
  std::vector<NamedTensor> out;
  for (ParamD* p : parameters()) out.push_back({p->name, Tensor::from_matrix(p->value)});
  return out;
}

void Regressor::load_params(const std::vector<NamedTensor>& tensors) {
  for (ParamD* p : parameters()) {
    Mat v = find_tensor(tensors, p->name).to_matrix();
    if (v.rows() != p->value.rows() || v.cols() != p->value.cols()) {
      throw ShapeError("checkpoint tensor " + p->name + " has shape " + describe_shapes(v, p->value));
    }
    p->value = std::move(v);
  }
}

std::vector<Mat> Regressor::snapshot() {
  std::vector<Mat> out;
  for (ParamD* p : parameters()) out.push_back(p->value);
  return out;
}

void Regressor::restore(const std::vector<Mat>& values) {
  auto params = parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values.at(i);
}

void Regressor::zero_grad() {
  for (ParamD* p : parameters()) p->zero_grad();
}

TetModel::TetModel(const ModelConfig& config, const ModelDims& dims, Rng& rng, ModelKind kind)
    : encoder(config.encoder, dims.vocab_size, rng),
      scorer(dims.d_llm, config.text_attention_dim, rng),
      head(config.fusion, config.encoder.d, dims.d_llm, dims.topics, rng),
      config_(config),
      kind_(kind) {
  if (kind != ModelKind::kFull && kind != ModelKind::kBehaviorOnly) {
    throw std::invalid_argument("TetModel supports only the full and behavior_only variants");
  }
}

std::vector<ParamD*> TetModel::parameters() {
  auto out = encoder.parameters();
  if (kind_ == ModelKind::kFull) {
    for (ParamD* p : scorer.parameters()) out.push_back(p);
  }
  for (ParamD* p : head.parameters()) out.push_back(p);
  return out;
}

std::pair<VarD, VarD> TetModel::forward(TapeD& tape, const Example& ex, bool train, Rng& rng) {
  const auto& ab = config_.ablations;
  VarD behavior = encoder.forward(tape, ex.tokens, train, rng, ab.mean_pooling);

  const bool text_missing = kind_ == ModelKind::kBehaviorOnly || ex.text_missing;
  std::optional<VarD> pooled;
  if (!text_missing) {
    VarD snippets = tape.constant(ex.snippets);
    pooled = ab.mean_pooling ? mean_rows(snippets) : pool_snippets(tape, snippets, scorer).pooled;
  }
  const bool modality_dropout = !ab.no_modality_dropout && kind_ == ModelKind::kFull;
  FuseResult fused = head.fuse(tape, behavior, pooled, ex.theta, text_missing, train, rng, modality_dropout);
  auto [mu, log_var] = head.predict(tape, fused.z, train, rng);
  if (ab.mse_loss) log_var = tape.constant(Mat::Zero(1, 1));
  return {mu, log_var};
}

RowVec baseline_features(ModelKind kind, const Example& ex) {
  const double missing = ex.text_missing ? 1.0 : 0.0;
  switch (kind) {
    case ModelKind::kAggregateFeatures: return ex.aggregates;
    case ModelKind::kTextOnly: {
      RowVec x(ex.mean_embedding.size() + 1);
      x << ex.mean_embedding, missing;
      return x;
    }
    case ModelKind::kStaticMM: {
      RowVec x(ex.aggregates.size() + ex.mean_embedding.size() + 1);
      x << ex.aggregates, ex.mean_embedding, missing;
      return x;
    }
    default: throw std::invalid_argument(std::string("no fixed feature vector for ") + to_string(kind));
  }
}

namespace {

int baseline_width(ModelKind kind, const ModelDims& dims) {
  switch (kind) {
    case ModelKind::kAggregateFeatures: return dims.aggregate_width;
    case ModelKind::kTextOnly: return dims.d_llm + 1;
    case ModelKind::kStaticMM: return dims.aggregate_width + dims.d_llm + 1;
    default: throw std::invalid_argument(std::string("no fixed feature vector for ") + to_string(kind));
  }
}

}  // namespace

LinearRegressor::LinearRegressor(ModelKind kind, const ModelDims& dims, bool mse_loss, Rng& rng)
    : kind_(kind), mse_loss_(mse_loss) {
  const std::string prefix = std::string(to_string(kind)) + ".";
  weight = weight_param(prefix + "weight", baseline_width(kind, dims), 2, rng);
  weight.value.col(1).setZero();
  bias = zero_param(prefix + "bias", 1, 2);
}

std::pair<VarD, VarD> LinearRegressor::forward(TapeD& tape, const Example& ex, bool, Rng&) {
  VarD x = tape.constant(Mat(baseline_features(kind_, ex)));
  VarD out = add_row(matmul(x, tape.param(weight)), tape.param(bias));
  VarD log_var = mse_loss_ ? tape.constant(Mat::Zero(1, 1)) : clamp(element(out, 0, 1), kLogVarMin, kLogVarMax);
  return {element(out, 0, 0), log_var};
}

StaticMultimodal::StaticMultimodal(const FusionConfig& fusion, const ModelDims& dims, bool mse_loss, Rng& rng)
    : p_drop_(fusion.p_drop), mse_loss_(mse_loss) {
  const int width = baseline_width(ModelKind::kStaticMM, dims);
  w1 = weight_param("static_mm.w1", width, fusion.d_f, rng);
  b1 = zero_param("static_mm.b1", 1, fusion.d_f);
  w2 = weight_param("static_mm.w2", fusion.d_f, 2, rng);
  w2.value.col(1).setZero();
  b2 = zero_param("static_mm.b2", 1, 2);
}

std::pair<VarD, VarD> StaticMultimodal::forward(TapeD& tape, const Example& ex, bool train, Rng& rng) {
  VarD x = tape.constant(Mat(baseline_features(ModelKind::kStaticMM, ex)));
  VarD hidden = relu(add_row(matmul(x, tape.param(w1)), tape.param(b1)));
  hidden = dropout(hidden, p_drop_, train, rng);
  VarD out = add_row(matmul(hidden, tape.param(w2)), tape.param(b2));
  VarD log_var = mse_loss_ ? tape.constant(Mat::Zero(1, 1)) : clamp(element(out, 0, 1), kLogVarMin, kLogVarMax);
  return {element(out, 0, 0), log_var};
}

std::unique_ptr<Regressor> make_model(ModelKind kind, const ModelConfig& config, const ModelDims& dims, Rng& rng) {
  switch (kind) {
    case ModelKind::kFull:
    case ModelKind::kBehaviorOnly: return std::make_unique<TetModel>(config, dims, rng, kind);
    case ModelKind::kAggregateFeatures:
    case ModelKind::kTextOnly: return std::make_unique<LinearRegressor>(kind, dims, config.ablations.mse_loss, rng);
    case ModelKind::kStaticMM: return std::make_unique<StaticMultimodal>(config.fusion, dims, config.ablations.mse_loss, rng);
  }
  throw std::invalid_argument("unknown model kind");
}

}  // namespace tet
