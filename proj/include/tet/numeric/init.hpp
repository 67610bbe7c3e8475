#pragma once

#include "tet/numeric/random.hpp"
#include "tet/numeric/tensor.hpp"

#include <cmath>
#include <string>

namespace tet {

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
inline Mat uniform_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(rng) - 1.0) * bound;
  return m;
}

/// Weight matrix applied as x * W, so fan_in is the row count.
inline ParamD weight_param(std::string name, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  return ParamD(std::move(name), uniform_init(rows, cols, rows, rng));
}

inline ParamD zero_param(std::string name, Eigen::Index rows, Eigen::Index cols) {
  return ParamD(std::move(name), Mat::Zero(rows, cols));
}

inline ParamD constant_param(std::string name, Eigen::Index rows, Eigen::Index cols, double v) {
  return ParamD(std::move(name), Mat::Constant(rows, cols, v));
}

}  // namespace tet
