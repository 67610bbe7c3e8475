#pragma once

#include "tet/app/pipeline.hpp"

namespace tet::testing {

inline SynthConfig tiny_synth(int enrollments = 300, std::uint64_t seed = 1) {
  SynthConfig c;
  c.n_runs = 10;
  c.n_enrollments = enrollments;
  c.d_llm = 16;
  c.text_probability = 0.4;
  c.seed = seed;
  return c;
}

inline ModelConfig tiny_model() {
  ModelConfig m;
  m.encoder.d = 8;
  m.encoder.heads = 2;
  m.encoder.layers = 1;
  m.encoder.ffn_hidden = 16;
  m.encoder.bins = 8;
  m.encoder.max_seq_len = 64;
  m.fusion.d_c = 4;
  m.fusion.d_f = 8;
  m.text_attention_dim = 4;
  return m;
}

inline PreprocessConfig tiny_preprocess() {
  PreprocessConfig p;
  p.bins = 8;
  p.max_seq_len = 64;
  p.topics = 3;
  return p;
}

inline PreparedHorizon tiny_data(const SynthData& data, int horizon = 7) {
  return prepare_horizon(data.corpus, data.cache, horizon, tiny_preprocess());
}

}  // namespace tet::testing
