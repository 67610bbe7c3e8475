#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tet {

// All model arithmetic is row-major so that a Matrix maps 1:1 onto the
// checkpoint payload layout.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Real = double;
using Mat = Matrix<Real>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename DerivedA, typename DerivedB>
std::string describe_shapes(const Eigen::EigenBase<DerivedA>& a,
                            const Eigen::EigenBase<DerivedB>& b) {
  std::ostringstream os;
  os << "[" << a.rows() << " x " << a.cols() << "] vs [" << b.rows() << " x "
     << b.cols() << "]";
  return os.str();
}

/// Generic n-dimensional carrier used at I/O boundaries. Data is row-major.
struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<double> data;

  std::size_t size() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }

  template <typename Scalar>
  static Tensor from_matrix(const Matrix<Scalar>& m) {
    Tensor t;
    t.shape = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.assign(m.data(), m.data() + m.size());
    return t;
  }

  static Tensor from_vector(const std::vector<double>& v) {
    return Tensor{{static_cast<std::uint32_t>(v.size())}, v};
  }

  /// Rank-1 tensors become a single row.
  Mat to_matrix() const {
    if (shape.empty() || shape.size() > 2) {
      throw ShapeError("tensor of rank " + std::to_string(shape.size()) +
                       " cannot be viewed as a matrix");
    }
    const Eigen::Index rows = shape.size() == 2 ? shape[0] : 1;
    const Eigen::Index cols = shape.back();
    Mat m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
  }
};

/// A learnable tensor and its gradient accumulator.
template <typename Scalar>
struct Param {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;

  Param() = default;
  Param(std::string n, Matrix<Scalar> v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix<Scalar>::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

using ParamD = Param<Real>;

}  // namespace tet
