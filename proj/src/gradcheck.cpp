#include "tet/model/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tet {

ParamCheck check_gradients(const std::vector<ParamD*>& params, const std::function<VarD(TapeD&)>& loss,
                           double step, double abs_floor) {
  for (ParamD* p : params) p->zero_grad();
  {
    TapeD tape;
    VarD l = loss(tape);
    tape.backward(l);
  }
  auto evaluate = [&] {
    TapeD tape;
    return loss(tape).scalar();
  };

  ParamCheck out;
  for (ParamD* p : params) {
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        double& x = p->value(r, c);
        const double saved = x;
        x = saved + step;
        const double up = evaluate();
        x = saved - step;
        const double down = evaluate();
        x = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double analytic = p->grad(r, c);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
        const double err = std::abs(analytic - numeric) / denom;
        ++out.checked;
        if (err > out.max_rel_error) {
          out.max_rel_error = err;
          out.worst_analytic = analytic;
          out.worst_numeric = numeric;
          out.worst = p->name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
        }
      }
    }
  }
  return out;
}

namespace {

Example random_example(Rng& rng, int vocab, int bins, int d_llm, int topics, int events, bool text_missing) {
  Example ex;
  ex.enrollment_id = "gradcheck";
  ex.label = 1.0 + 4.0 * uniform01(rng);
  for (int j = 0; j < events; ++j) {
    ex.tokens.types.push_back(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(vocab))));
    ex.tokens.gap_bins.push_back(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(bins))));
  }
  ex.text_missing = text_missing;
  ex.theta = RowVec::Zero(topics);
  ex.mean_embedding = RowVec::Zero(d_llm);
  if (!text_missing) {
    const int k = 1 + static_cast<int>(uniform_index(rng, 3));
    ex.snippets = Mat(k, d_llm);
    for (Eigen::Index i = 0; i < ex.snippets.size(); ++i) ex.snippets.data()[i] = standard_normal(rng);
    double total = 0.0;
    for (int t = 0; t < topics; ++t) total += ex.theta(t) = 0.1 + uniform01(rng);
    ex.theta /= total;
    ex.mean_embedding = ex.snippets.colwise().mean();
  }
  ex.aggregates = RowVec::Zero(vocab + 2);
  return ex;
}

}  // namespace

GradcheckResult run_gradcheck(const GradcheckConfig& config) {
  constexpr int kDLlm = 8;
  constexpr int kTopics = 3;
  GradcheckResult result;
  result.passed = true;
  for (int i = 0; i < config.seeds; ++i) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
    Rng rng(seed);

    ModelConfig mc;
    mc.encoder.heads = 1 + static_cast<int>(uniform_index(rng, 2));
    mc.encoder.d = mc.encoder.heads * (2 + 2 * static_cast<int>(uniform_index(rng, 4)));  // <= 16
    mc.encoder.layers = 1 + static_cast<int>(uniform_index(rng, 2));
    mc.encoder.ffn_hidden = 4 + static_cast<int>(uniform_index(rng, 8));
    mc.encoder.bins = 4;
    mc.encoder.max_seq_len = 8;
    mc.encoder.p_mask = 0.2;
    mc.fusion.d_c = 2 + static_cast<int>(uniform_index(rng, 5));
    mc.fusion.d_f = 4 + static_cast<int>(uniform_index(rng, 6));
    mc.text_attention_dim = 2 + static_cast<int>(uniform_index(rng, 5));
    mc.ablations.mean_pooling = i % 5 == 4;

    const int vocab = 3 + static_cast<int>(uniform_index(rng, 4));
    const int events = static_cast<int>(uniform_index(rng, 9));  // 0..8
    const bool text_missing = i % 4 == 3;
    const ModelDims dims{vocab, kDLlm, kTopics, vocab + 2};
    TetModel model(mc, dims, rng);
    // Push weights off their initialization so that the log-variance column
    // is not identically zero.
    for (ParamD* p : model.parameters()) {
      for (Eigen::Index k = 0; k < p->value.size(); ++k) p->value.data()[k] += 0.1 * standard_normal(rng);
    }
    const Example ex = random_example(rng, vocab, mc.encoder.bins, kDLlm, kTopics, events, text_missing);
    const std::uint64_t stream = rng();

    auto loss = [&](TapeD& tape) {
      Rng dropout_rng(stream);
      auto [mu, log_var] = model.forward(tape, ex, true, dropout_rng);
      return gaussian_nll(mu, log_var, ex.label);
    };

    GradcheckCase c;
    c.seed = seed;
    char desc[160];
    std::snprintf(desc, sizeof(desc), "m=%d d=%d heads=%d layers=%d vocab=%d text=%s pooling=%s", events,
                  mc.encoder.d, mc.encoder.heads, mc.encoder.layers, vocab, text_missing ? "missing" : "present",
                  mc.ablations.mean_pooling ? "mean" : "attention");
    c.description = desc;
    c.check = check_gradients(model.parameters(), loss, config.step, config.abs_floor);
    c.passed = c.check.max_rel_error < config.rel_tol;
    result.passed = result.passed && c.passed;
    result.cases.push_back(std::move(c));
  }
  return result;
}

std::string format_gradcheck(const GradcheckResult& result) {
  std::string out;
  for (const auto& c : result.cases) {
    char line[320];
    std::snprintf(line, sizeof(line), "%s seed=%llu %s checked=%zu max_rel_err=%.3e worst=%s (%.6e vs %.6e)\n",
                  c.passed ? "ok  " : "FAIL", static_cast<unsigned long long>(c.seed), c.description.c_str(),
                  c.check.checked, c.check.max_rel_error, c.check.worst.c_str(), c.check.worst_analytic, c.check.worst_numeric);
    out += line;
  }
  out += result.passed ? "gradcheck passed\n" : "gradcheck FAILED\n";
  return out;
}

}  // namespace tet
