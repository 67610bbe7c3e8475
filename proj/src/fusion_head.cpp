#include "tet/fusion/fusion_head.hpp"

#include "tet/numeric/init.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tet {

void FusionConfig::validate() const {
  for (double p : {p_drop, p_mod_text, p_mod_behavior}) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("fusion probabilities must lie in [0,1)");
  }
  if (d_c < 1 || d_f < 1) throw std::invalid_argument("fusion widths must be positive");
}

double GaussianPrediction::var() const { return std::exp(log_var); }
double GaussianPrediction::sigma() const { return std::exp(0.5 * log_var); }

GaussianPrediction GaussianPrediction::reported() const {
  return {std::clamp(mu, 1.0, 5.0), log_var};
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal quantile needs p in (0,1)");
  if (p == 0.95) return kZ95;
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::pair<double, double> interval(const GaussianPrediction& pred, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("interval level must lie in (0,1)");
  const double half = normal_quantile((1.0 + level) / 2.0) * pred.sigma();
  return {pred.mu - half, pred.mu + half};
}

double nll_loss(const GaussianPrediction& pred, double y) {
  const double r = y - pred.mu;
  return r * r / (2.0 * pred.var()) + 0.5 * pred.log_var;
}

FusionHead::FusionHead(const FusionConfig& config, int d_behavior, int d_llm, int topics, Rng& rng)
    : config_(config) {
  config_.validate();
  const int dc = config_.d_c;
  proj_behavior = weight_param("fusion.proj_behavior", d_behavior, dc, rng);
  proj_text = weight_param("fusion.proj_text", d_llm, dc, rng);
  proj_topics = weight_param("fusion.proj_topics", topics, dc, rng);
  w1 = weight_param("head.w1", 3 * dc + 1, config_.d_f, rng);
  b1 = zero_param("head.b1", 1, config_.d_f);
  w2 = weight_param("head.w2", config_.d_f, 2, rng);
  w2.value.col(1).setZero();  // log-variance starts at 0, i.e. unit variance
  b2 = zero_param("head.b2", 1, 2);
}

std::vector<ParamD*> FusionHead::parameters() {
  return {&proj_behavior, &proj_text, &proj_topics, &w1, &b1, &w2, &b2};
}

FuseResult FusionHead::fuse(TapeD& tape, VarD behavior, std::optional<VarD> pooled_text, const RowVec& theta,
                            bool text_missing, bool train, Rng& rng, bool modality_dropout) {
  FuseResult out;
  if (train && modality_dropout) {
    out.text_dropped = bernoulli(rng, config_.p_mod_text);
    out.behavior_dropped = bernoulli(rng, config_.p_mod_behavior);
  }
  const int dc = config_.d_c;
  const bool text_off = text_missing || out.text_dropped || !pooled_text.has_value();

  std::vector<VarD> blocks;
  blocks.push_back(out.behavior_dropped ? tape.constant(Mat::Zero(1, dc))
                                        : matmul(behavior, tape.param(proj_behavior)));
  if (text_off) {
    blocks.push_back(tape.constant(Mat::Zero(1, 2 * dc)));
  } else {
    if (theta.size() != proj_topics.value.rows()) {
      throw ShapeError("topic vector width " + std::to_string(theta.size()) + " does not match K=" +
                       std::to_string(proj_topics.value.rows()));
    }
    blocks.push_back(matmul(*pooled_text, tape.param(proj_text)));
    blocks.push_back(matmul(tape.constant(Mat(theta)), tape.param(proj_topics)));
  }
  blocks.push_back(tape.constant(Mat::Constant(1, 1, text_off ? 1.0 : 0.0)));
  out.z = concat_cols(blocks);
  return out;
}

std::pair<VarD, VarD> FusionHead::predict(TapeD& tape, VarD z, bool train, Rng& rng) {
  VarD hidden = relu(add_row(matmul(z, tape.param(w1)), tape.param(b1)));
  hidden = dropout(hidden, config_.p_drop, train, rng);
  VarD out = add_row(matmul(hidden, tape.param(w2)), tape.param(b2));
  return {element(out, 0, 0), clamp(element(out, 0, 1), kLogVarMin, kLogVarMax)};
}

}  // namespace tet
