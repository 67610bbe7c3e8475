#include "tet/training/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace tet {

AdamState AdamState::for_params(std::span<ParamD* const> params) {
  AdamState s;
  for (const ParamD* p : params) {
    s.m.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    s.v.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
  return s;
}

void adam_step(std::span<ParamD* const> params, AdamState& state, const AdamConfig& config) {
  if (state.m.size() != params.size()) throw std::invalid_argument("Adam state does not match parameter list");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamD& p = *params[i];
    Mat& m = state.m[i];
    Mat& v = state.v[i];
    if (m.rows() != p.value.rows() || m.cols() != p.value.cols()) {
      throw ShapeError("Adam state shape mismatch for " + p.name);
    }
    m = config.beta1 * m + (1.0 - config.beta1) * p.grad;
    v = config.beta2 * v + (1.0 - config.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + config.eps);
  }
}

}  // namespace tet
