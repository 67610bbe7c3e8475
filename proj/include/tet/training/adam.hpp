#pragma once

#include "tet/numeric/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tet {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  std::uint64_t step = 0;

  static AdamState for_params(std::span<ParamD* const> params);
};

/// Bias-corrected Adam update of every parameter from its accumulated grad.
void adam_step(std::span<ParamD* const> params, AdamState& state, const AdamConfig& config);

}  // namespace tet
