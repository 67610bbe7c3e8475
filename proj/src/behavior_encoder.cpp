#include "tet/encoder/behavior_encoder.hpp"

#include "tet/numeric/init.hpp"

#include <cmath>
#include <stdexcept>

namespace tet {

void EncoderConfig::validate() const {
  if (d <= 0 || heads <= 0 || d % heads != 0) {
    throw std::invalid_argument("encoder hidden size d=" + std::to_string(d) +
                                " must be divisible by heads=" + std::to_string(heads));
  }
  if (bins < 2) throw std::invalid_argument("encoder needs at least 2 time-gap bins");
  if (layers < 1) throw std::invalid_argument("encoder needs at least 1 layer");
  if (!(p_mask >= 0.0 && p_mask < 1.0)) throw std::invalid_argument("p_mask must lie in [0,1)");
  if (max_seq_len < 1 || ffn_hidden < 1) throw std::invalid_argument("max_seq_len and ffn_hidden must be positive");
}

EventTokens tokenize_events(const HorizonView& view, const BucketEdges& edges, int max_seq_len,
                            int vocab_size) {
  EventTokens out;
  const std::size_t n = view.events.size();
  const std::size_t first = n > static_cast<std::size_t>(max_seq_len) ? n - static_cast<std::size_t>(max_seq_len) : 0;
  for (std::size_t j = first; j < n; ++j) {
    const int type = view.events[j].event_type;
    if (type < 0 || type >= vocab_size) {
      throw std::out_of_range("event type index " + std::to_string(type) + " outside vocabulary of " +
                              std::to_string(vocab_size));
    }
    const double gap = j == first ? 0.0 : view.events[j].timestamp - view.events[j - 1].timestamp;
    out.types.push_back(type);
    out.gap_bins.push_back(edges.bin_of_gap(gap));
  }
  return out;
}

AttentionPoolResult attention_pool(VarD states, VarD query) {
  if (states.rows() == 0) throw ShapeError("attention_pool over an empty sequence");
  if (query.rows() != 1 || query.cols() != states.cols()) {
    throw ShapeError("attention_pool query shape mismatch: " + describe_shapes(states.value(), query.value()));
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(states.cols()));
  VarD scores = scale(matmul(query, transpose(states)), inv_sqrt_d);  // 1 x m
  VarD alpha = softmax_rows(scores);
  return {matmul(alpha, states), alpha.value()};
}

BehaviorEncoder::BehaviorEncoder(const EncoderConfig& config, int vocab_size, Rng& rng)
    : config_(config), vocab_size_(vocab_size) {
  config_.validate();
  if (vocab_size < 1) throw std::invalid_argument("event vocabulary is empty");
  const int d = config_.d;
  event_embedding = weight_param("encoder.event_embedding", vocab_size, d, rng);
  gap_embedding = weight_param("encoder.gap_embedding", config_.bins, d, rng);
  position_embedding = weight_param("encoder.position_embedding", config_.max_seq_len, d, rng);
  mask_vector = ParamD("encoder.mask_vector", uniform_init(1, d, d, rng));
  empty_vector = ParamD("encoder.empty_vector", uniform_init(1, d, d, rng));
  pool_query = ParamD("encoder.pool_query", uniform_init(1, d, d, rng));
  final_gain = constant_param("encoder.final_gain", 1, d, 1.0);
  final_bias = zero_param("encoder.final_bias", 1, d);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "encoder.layer" + std::to_string(l) + ".";
    const int f = config_.ffn_hidden;
    layers.push_back(EncoderLayer{
        constant_param(p + "ln1_gain", 1, d, 1.0), zero_param(p + "ln1_bias", 1, d),
        weight_param(p + "wq", d, d, rng), zero_param(p + "bq", 1, d),
        weight_param(p + "wk", d, d, rng), zero_param(p + "bk", 1, d),
        weight_param(p + "wv", d, d, rng), zero_param(p + "bv", 1, d),
        weight_param(p + "wo", d, d, rng), zero_param(p + "bo", 1, d),
        constant_param(p + "ln2_gain", 1, d, 1.0), zero_param(p + "ln2_bias", 1, d),
        weight_param(p + "w1", d, f, rng), zero_param(p + "b1", 1, f),
        weight_param(p + "w2", f, d, rng), zero_param(p + "b2", 1, d),
    });
  }
}

std::vector<ParamD*> BehaviorEncoder::parameters() {
  std::vector<ParamD*> out{&event_embedding, &gap_embedding, &position_embedding, &mask_vector,
                           &empty_vector,    &pool_query,    &final_gain,         &final_bias};
  for (auto& l : layers) {
    for (ParamD* p : {&l.ln1_gain, &l.ln1_bias, &l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv, &l.wo, &l.bo,
                      &l.ln2_gain, &l.ln2_bias, &l.w1, &l.b1, &l.w2, &l.b2}) {
      out.push_back(p);
    }
  }
  return out;
}

VarD BehaviorEncoder::embed_events(TapeD& tape, const EventTokens& tokens) {
  if (tokens.size() == 0) throw ShapeError("embed_events needs at least one event");
  if (tokens.size() > static_cast<std::size_t>(config_.max_seq_len)) {
    throw ShapeError("sequence of " + std::to_string(tokens.size()) + " events exceeds max_seq_len");
  }
  std::vector<int> positions(tokens.size());
  for (std::size_t j = 0; j < positions.size(); ++j) positions[j] = static_cast<int>(j);
  VarD x = gather_rows(tape.param(event_embedding), tokens.types);
  x = x + gather_rows(tape.param(gap_embedding), tokens.gap_bins);
  return x + gather_rows(tape.param(position_embedding), std::move(positions));
}

VarD BehaviorEncoder::attention_block(TapeD& tape, EncoderLayer& layer, VarD x) {
  VarD a = add_row(mul_row(layer_norm_rows(x), tape.param(layer.ln1_gain)), tape.param(layer.ln1_bias));
  VarD q = add_row(matmul(a, tape.param(layer.wq)), tape.param(layer.bq));
  VarD k = add_row(matmul(a, tape.param(layer.wk)), tape.param(layer.bk));
  VarD v = add_row(matmul(a, tape.param(layer.wv)), tape.param(layer.bv));
  const int dk = config_.d / config_.heads;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<VarD> heads;
  for (int h = 0; h < config_.heads; ++h) {
    VarD qh = slice_cols(q, h * dk, dk);
    VarD kh = slice_cols(k, h * dk, dk);
    VarD vh = slice_cols(v, h * dk, dk);
    VarD attn = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt_dk));
    heads.push_back(matmul(attn, vh));
  }
  VarD merged = heads.size() == 1 ? heads.front() : concat_cols(heads);
  return add_row(matmul(merged, tape.param(layer.wo)), tape.param(layer.bo));
}

VarD BehaviorEncoder::encode(TapeD& tape, VarD x, bool train, Rng& rng) {
  if (x.cols() != config_.d) throw ShapeError("encode input width does not match d");
  if (train && config_.p_mask > 0.0) {
    std::vector<bool> masked(static_cast<std::size_t>(x.rows()));
    bool any = false;
    for (std::size_t j = 0; j < masked.size(); ++j) {
      masked[j] = bernoulli(rng, config_.p_mask);
      any = any || masked[j];
    }
    if (any) x = replace_rows(x, std::move(masked), tape.param(mask_vector));
  }
  for (auto& layer : layers) {
    x = x + attention_block(tape, layer, x);
    VarD a = add_row(mul_row(layer_norm_rows(x), tape.param(layer.ln2_gain)), tape.param(layer.ln2_bias));
    VarD hidden = relu(add_row(matmul(a, tape.param(layer.w1)), tape.param(layer.b1)));
    x = x + add_row(matmul(hidden, tape.param(layer.w2)), tape.param(layer.b2));
  }
  return add_row(mul_row(layer_norm_rows(x), tape.param(final_gain)), tape.param(final_bias));
}

VarD BehaviorEncoder::forward(TapeD& tape, const EventTokens& tokens, bool train, Rng& rng, bool mean_pooling) {
  if (tokens.size() == 0) return tape.param(empty_vector);
  VarD h = encode(tape, embed_events(tape, tokens), train, rng);
  if (mean_pooling) return mean_rows(h);
  return attention_pool(h, tape.param(pool_query)).pooled;
}

}  // namespace tet
