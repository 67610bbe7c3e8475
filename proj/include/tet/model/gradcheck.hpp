#pragma once

#include "tet/model/models.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tet {

struct GradcheckConfig {
  int seeds = 20;
  std::uint64_t base_seed = 1;
  double step = 1e-5;
  double rel_tol = 1e-4;
  // Denominator floor of the relative error, so that gradients which are
  // zero up to rounding are compared absolutely.
  double abs_floor = 1e-5;
};

struct ParamCheck {
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[row,col]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients of a scalar loss against central finite
/// differences over every entry of `params`. `loss` must be a pure function
/// of the parameter values (reseed any dropout stream inside it).
ParamCheck check_gradients(const std::vector<ParamD*>& params, const std::function<VarD(TapeD&)>& loss,
                           double step, double abs_floor);

struct GradcheckCase {
  std::uint64_t seed = 0;
  std::string description;
  ParamCheck check;
  bool passed = false;
};

struct GradcheckResult {
  std::vector<GradcheckCase> cases;
  bool passed = false;
};

/// Random small full models (m <= 8, d <= 16, d_llm = 8, K = 3) in training
/// mode, NLL readout.
GradcheckResult run_gradcheck(const GradcheckConfig& config = {});

std::string format_gradcheck(const GradcheckResult& result);

}  // namespace tet
