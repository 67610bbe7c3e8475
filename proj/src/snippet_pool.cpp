#include "tet/text/snippet_pool.hpp"

#include "tet/numeric/init.hpp"

namespace tet {

SnippetScorer::SnippetScorer(int d_llm, int attention_dim, Rng& rng)
    : projection(weight_param("text.score_projection", d_llm, attention_dim, rng)),
      weight(weight_param("text.score_weight", attention_dim, 1, rng)) {}

SnippetPoolResult pool_snippets(TapeD& tape, VarD snippets, SnippetScorer& scorer) {
  if (snippets.rows() == 0) throw ShapeError("pool_snippets needs at least one snippet");
  VarD hidden = tanh(matmul(snippets, tape.param(scorer.projection)));  // k x a
  VarD scores = transpose(matmul(hidden, tape.param(scorer.weight)));  // 1 x k
  VarD beta = softmax_rows(scores);
  return {matmul(beta, snippets), beta.value()};
}

Mat gather_snippets(const EmbeddingCache& cache, const std::vector<std::string>& snippet_ids) {
  Mat out(static_cast<Eigen::Index>(snippet_ids.size()), cache.d_llm());
  for (std::size_t k = 0; k < snippet_ids.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = cache.at(snippet_ids[k]);
  return out;
}

}  // namespace tet
