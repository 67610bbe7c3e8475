#pragma once

#include "tet/numeric/tape.hpp"
#include "tet/text/embedding_cache.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace tet {

struct FusionConfig {
  int d_c = 16;          // common projection width per modality
  int d_f = 32;          // output MLP hidden width
  double p_drop = 0.3;   // MLP dropout
  double p_mod_text = 0.3;
  double p_mod_behavior = 0.1;

  void validate() const;
};

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;
/// Standard normal 0.95 quantile, the half-width multiplier of a 90% interval.
inline constexpr double kZ95 = 1.6448536;

struct GaussianPrediction {
  double mu = 0.0;
  double log_var = 0.0;

  double var() const;
  double sigma() const;
  /// Same variance, mean clamped to the label range [1,5].
  GaussianPrediction reported() const;
};

/// mu -/+ z * sigma with z the (1+level)/2 standard normal quantile.
std::pair<double, double> interval(const GaussianPrediction& pred, double level = 0.90);
double normal_quantile(double p);

/// (y - mu)^2 / (2 var) + log(var) / 2.
double nll_loss(const GaussianPrediction& pred, double y);

struct FuseResult {
  VarD z;
  bool text_dropped = false;
  bool behavior_dropped = false;
};

/// Projection of the three modalities, concatenation with the text
/// missingness bit, and the two-layer heteroscedastic output MLP.
class FusionHead {
 public:
  FusionHead(const FusionConfig& config, int d_behavior, int d_llm, int topics, Rng& init_rng);

  /// z = [b W_b ; h W_h ; theta W_theta ; m_text]. Missing or dropped text
  /// zeroes both text blocks and sets the bit to 1; a dropped behavior block
  /// is zeroed without any indicator. `pooled_text` is ignored when missing.
  FuseResult fuse(TapeD& tape, VarD behavior, std::optional<VarD> pooled_text, const RowVec& theta,
                  bool text_missing, bool train, Rng& rng, bool modality_dropout = true);

  /// (raw mu, clamped log-variance), each 1 x 1.
  std::pair<VarD, VarD> predict(TapeD& tape, VarD z, bool train, Rng& rng);

  std::vector<ParamD*> parameters();
  const FusionConfig& config() const { return config_; }

  ParamD proj_behavior, proj_text, proj_topics;
  ParamD w1, b1, w2, b2;

 private:
  FusionConfig config_;
};

}  // namespace tet
