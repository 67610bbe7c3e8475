#pragma once

#include "tet/numeric/tape.hpp"
#include "tet/text/embedding_cache.hpp"

#include <vector>

namespace tet {

/// Additive attention scorer: score_k = w . tanh(U^T h_k).
struct SnippetScorer {
  ParamD projection;  // d_llm x attention_dim
  ParamD weight;      // attention_dim x 1

  SnippetScorer() = default;
  SnippetScorer(int d_llm, int attention_dim, Rng& rng);

  std::vector<ParamD*> parameters() { return {&projection, &weight}; }
};

struct SnippetPoolResult {
  VarD pooled;  // 1 x d_llm
  Mat weights;  // 1 x k
};

/// Softmax-weighted sum of snippet rows (k x d_llm, k >= 1).
SnippetPoolResult pool_snippets(TapeD& tape, VarD snippets, SnippetScorer& scorer);

/// Stacks the cached vectors of `snippet_ids` into a k x d_llm matrix.
Mat gather_snippets(const EmbeddingCache& cache, const std::vector<std::string>& snippet_ids);

}  // namespace tet
