#pragma once

#include "tet/data/types.hpp"
#include "tet/encoder/buckets.hpp"
#include "tet/numeric/tape.hpp"

#include <vector>

namespace tet {

struct EncoderConfig {
  int d = 16;
  int layers = 2;
  int heads = 2;
  int bins = 16;
  double p_mask = 0.1;
  int max_seq_len = 512;
  int ffn_hidden = 32;

  void validate() const;
};

/// Per-event integer inputs to the encoder: vocabulary index and time-gap bin.
struct EventTokens {
  std::vector<int> types;
  std::vector<int> gap_bins;

  std::size_t size() const { return types.size(); }
};

/// Keeps the most recent max_seq_len events; the first kept event gets gap 0.
EventTokens tokenize_events(const HorizonView& view, const BucketEdges& edges, int max_seq_len,
                            int vocab_size);

struct EncoderLayer {
  ParamD ln1_gain, ln1_bias;
  ParamD wq, bq, wk, bk, wv, bv, wo, bo;
  ParamD ln2_gain, ln2_bias;
  ParamD w1, b1, w2, b2;
};

struct AttentionPoolResult {
  VarD pooled;  // 1 x d
  Mat weights;  // 1 x m
};

/// softmax_j(q . H_j / sqrt(d)) weighted sum of the rows of H. H must have at
/// least one row.
AttentionPoolResult attention_pool(VarD states, VarD query);

class BehaviorEncoder {
 public:
  BehaviorEncoder(const EncoderConfig& config, int vocab_size, Rng& init_rng);

  /// x_j = W_e[type_j] + W_tau[bin_j] + P[j], m x d.
  VarD embed_events(TapeD& tape, const EventTokens& tokens);

  /// Pre-norm Transformer stack; in train mode each row is replaced by the
  /// learned mask vector with probability p_mask.
  VarD encode(TapeD& tape, VarD x, bool train, Rng& rng);

  /// Embed, encode, and pool to a 1 x d behavior vector. Empty sequences map
  /// to a learned vector.
  VarD forward(TapeD& tape, const EventTokens& tokens, bool train, Rng& rng, bool mean_pooling = false);

  std::vector<ParamD*> parameters();
  const EncoderConfig& config() const { return config_; }
  int vocab_size() const { return vocab_size_; }

  ParamD event_embedding;
  ParamD gap_embedding;
  ParamD position_embedding;
  ParamD mask_vector;
  ParamD empty_vector;
  ParamD pool_query;
  ParamD final_gain, final_bias;
  std::vector<EncoderLayer> layers;

 private:
  VarD attention_block(TapeD& tape, EncoderLayer& layer, VarD x);

  EncoderConfig config_;
  int vocab_size_;
};

}  // namespace tet
