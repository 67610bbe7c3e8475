#pragma once

// Reverse-mode differentiation over dense Eigen matrices.
//
// A Tape records every operation applied to Var handles during a forward
// pass. backward() walks the record in reverse and accumulates exact partial
// derivatives into node gradients; leaves created with Tape::param() write
// straight into Param::grad, so gradients of several examples recorded on
// separate tapes sum into the same accumulator.

#include "tet/numeric/random.hpp"
#include "tet/numeric/tensor.hpp"

#include <cmath>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tet {

template <typename Scalar>
class Tape;

template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const Matrix<Scalar>& value() const { return tape->value(id); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Scalar scalar() const { return value()(0, 0); }
};

template <typename Scalar>
class Tape {
 public:
  using M = Matrix<Scalar>;
  using Backward = std::function<void(Tape&, const M&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> constant(M value) {
    nodes_.push_back(Node{std::move(value), nullptr, {}, false, {}});
    return handle();
  }

  Var<Scalar> param(Param<Scalar>& p) {
    nodes_.push_back(Node{{}, &p, {}, true, {}});
    return handle();
  }

  Var<Scalar> record(M value, std::initializer_list<Var<Scalar>> inputs, Backward back) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || needs_grad(v.id);
    nodes_.push_back(Node{std::move(value), nullptr, {}, needs, needs ? std::move(back) : Backward{}});
    return handle();
  }

  Var<Scalar> record(M value, const std::vector<Var<Scalar>>& inputs, Backward back) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || needs_grad(v.id);
    nodes_.push_back(Node{std::move(value), nullptr, {}, needs, needs ? std::move(back) : Backward{}});
    return handle();
  }

  const M& value(int id) const {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    return n.param ? n.param->value : n.value;
  }

  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  /// Gradient slot of a node, allocated on first use.
  M& grad_slot(int id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.param) return n.param->grad;
    if (n.grad.size() == 0) n.grad = M::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    if (!needs_grad(id)) return;
    grad_slot(id) += g;
  }

  /// Gradient of a non-leaf node after backward(); zero if never reached.
  M grad(int id) const {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.param) return n.param->grad;
    if (n.grad.size() == 0) return M::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  void backward(Var<Scalar> loss, Scalar seed = Scalar(1)) {
    if (nodes_.empty() || loss.tape != this || loss.id < 0 ||
        static_cast<std::size_t>(loss.id) >= nodes_.size()) {
      throw std::logic_error("backward called before a forward pass was recorded");
    }
    if (loss.rows() != 1 || loss.cols() != 1) {
      throw ShapeError("backward requires a scalar loss, got [" +
                       std::to_string(loss.rows()) + " x " + std::to_string(loss.cols()) + "]");
    }
    if (!needs_grad(loss.id)) return;
    grad_slot(loss.id)(0, 0) += seed;
    for (int i = loss.id; i >= 0; --i) {
      auto& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.backward || n.grad.size() == 0) continue;
      n.backward(*this, n.grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    M value;
    Param<Scalar>* param;
    M grad;
    bool needs_grad;
    Backward backward;
  };

  Var<Scalar> handle() { return Var<Scalar>{this, static_cast<int>(nodes_.size()) - 1}; }

  std::vector<Node> nodes_;
};

using TapeD = Tape<Real>;
using VarD = Var<Real>;

// ---------------------------------------------------------------------------
// Plain dense kernels, shared by the recorded ops below.

template <typename Scalar>
Matrix<Scalar> matmul(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul shape mismatch: " + describe_shapes(a, b));
  return a * b;
}

template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& a) {
  Matrix<Scalar> out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const Scalar mx = a.row(r).maxCoeff();
    out.row(r) = (a.row(r).array() - mx).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> relu(const Matrix<Scalar>& a) {
  return a.cwiseMax(Scalar(0));
}

/// Inverted dropout: survivors are scaled by 1/(1-p).
template <typename Scalar>
Matrix<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout probability must lie in [0,1)");
  Matrix<Scalar> mask(rows, cols);
  const Scalar keep = Scalar(1) / Scalar(1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = bernoulli(rng, p) ? Scalar(0) : keep;
  }
  return mask;
}

template <typename Scalar>
Matrix<Scalar> dropout(const Matrix<Scalar>& a, double p, Rng& rng) {
  if (p == 0.0) return a;
  return a.cwiseProduct(dropout_mask<Scalar>(a.rows(), a.cols(), p, rng));
}

// ---------------------------------------------------------------------------
// Recorded operations.

template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  auto& t = *a.tape;
  return t.record(matmul(a.value(), b.value()), {a, b}, [a, b](Tape<Scalar>& tp, const auto& g) {
    if (tp.needs_grad(a.id)) tp.accumulate(a.id, g * b.value().transpose());
    if (tp.needs_grad(b.id)) tp.accumulate(b.id, a.value().transpose() * g);
  });
}

template <typename Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("add shape mismatch: " + describe_shapes(a.value(), b.value()));
  }
  return a.tape->record(a.value() + b.value(), {a, b}, [a, b](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, g);
    tp.accumulate(b.id, g);
  });
}

template <typename Scalar>
Var<Scalar> operator+(Var<Scalar> a, Var<Scalar> b) {
  return add(a, b);
}

/// Adds a 1 x n row to every row of a.
template <typename Scalar>
Var<Scalar> add_row(Var<Scalar> a, Var<Scalar> row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError("add_row shape mismatch: " + describe_shapes(a.value(), row.value()));
  }
  Matrix<Scalar> out = a.value().rowwise() + row.value().row(0);
  return a.tape->record(std::move(out), {a, row}, [a, row](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, g);
    if (tp.needs_grad(row.id)) tp.accumulate(row.id, g.colwise().sum());
  });
}

/// Multiplies every row of a elementwise by a 1 x n row.
template <typename Scalar>
Var<Scalar> mul_row(Var<Scalar> a, Var<Scalar> row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError("mul_row shape mismatch: " + describe_shapes(a.value(), row.value()));
  }
  Matrix<Scalar> out = a.value().array().rowwise() * row.value().row(0).array();
  return a.tape->record(std::move(out), {a, row}, [a, row](Tape<Scalar>& tp, const auto& g) {
    if (tp.needs_grad(a.id)) {
      Matrix<Scalar> ga = g.array().rowwise() * row.value().row(0).array();
      tp.accumulate(a.id, ga);
    }
    if (tp.needs_grad(row.id)) tp.accumulate(row.id, g.cwiseProduct(a.value()).colwise().sum());
  });
}

template <typename Scalar>
Var<Scalar> scale(Var<Scalar> a, Scalar s) {
  return a.tape->record(a.value() * s, {a}, [a, s](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, g * s);
  });
}

template <typename Scalar>
Var<Scalar> relu(Var<Scalar> a) {
  return a.tape->record(relu(a.value()), {a}, [a](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, g.cwiseProduct((a.value().array() > Scalar(0)).template cast<Scalar>().matrix()));
  });
}

template <typename Scalar>
Var<Scalar> tanh(Var<Scalar> a) {
  Matrix<Scalar> out = a.value().array().tanh().matrix();
  Matrix<Scalar> deriv = (Scalar(1) - out.array().square()).matrix();
  return a.tape->record(std::move(out), {a}, [a, deriv = std::move(deriv)](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, g.cwiseProduct(deriv));
  });
}

template <typename Scalar>
Var<Scalar> softmax_rows(Var<Scalar> a) {
  Matrix<Scalar> out = softmax_rows(a.value());
  Matrix<Scalar> s = out;
  return a.tape->record(std::move(out), {a}, [a, s = std::move(s)](Tape<Scalar>& tp, const auto& g) {
    Matrix<Scalar> dot = g.cwiseProduct(s).rowwise().sum();
    Matrix<Scalar> ga = s.cwiseProduct(g - dot.replicate(1, g.cols()));
    tp.accumulate(a.id, ga);
  });
}

/// Per-row normalization to zero mean, unit variance (no affine part).
template <typename Scalar>
Var<Scalar> layer_norm_rows(Var<Scalar> a, Scalar eps = Scalar(1e-5)) {
  const auto& x = a.value();
  const Eigen::Index n = x.cols();
  Matrix<Scalar> xhat(x.rows(), n);
  Matrix<Scalar> inv_std(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = x.row(r).mean();
    const Scalar var = (x.row(r).array() - mean).square().mean();
    inv_std(r, 0) = Scalar(1) / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mean) * inv_std(r, 0);
  }
  Matrix<Scalar> xhat_copy = xhat;
  return a.tape->record(std::move(xhat), {a},
                        [a, xhat = std::move(xhat_copy), inv_std](Tape<Scalar>& tp, const auto& g) {
                          Matrix<Scalar> ga(g.rows(), g.cols());
                          for (Eigen::Index r = 0; r < g.rows(); ++r) {
                            const Scalar gm = g.row(r).mean();
                            const Scalar gx = g.row(r).cwiseProduct(xhat.row(r)).mean();
                            ga.row(r) = inv_std(r, 0) *
                                        (g.row(r).array() - gm - xhat.row(r).array() * gx).matrix();
                          }
                          tp.accumulate(a.id, ga);
                        });
}

/// Inverted dropout; identity outside training or when p == 0.
template <typename Scalar>
Var<Scalar> dropout(Var<Scalar> a, double p, bool train, Rng& rng) {
  if (!train || p == 0.0) return a;
  Matrix<Scalar> mask = dropout_mask<Scalar>(a.rows(), a.cols(), p, rng);
  Matrix<Scalar> out = a.value().cwiseProduct(mask);
  return a.tape->record(std::move(out), {a}, [a, mask = std::move(mask)](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, g.cwiseProduct(mask));
  });
}

/// Rows of table selected by index, in order.
template <typename Scalar>
Var<Scalar> gather_rows(Var<Scalar> table, std::vector<int> index) {
  const auto& tv = table.value();
  Matrix<Scalar> out(static_cast<Eigen::Index>(index.size()), tv.cols());
  for (std::size_t j = 0; j < index.size(); ++j) {
    if (index[j] < 0 || index[j] >= tv.rows()) {
      throw std::out_of_range("gather_rows index " + std::to_string(index[j]) +
                              " outside table of " + std::to_string(tv.rows()) + " rows");
    }
    out.row(static_cast<Eigen::Index>(j)) = tv.row(index[j]);
  }
  return table.tape->record(std::move(out), {table}, [table, index = std::move(index)](Tape<Scalar>& tp, const auto& g) {
    auto& slot = tp.grad_slot(table.id);
    for (std::size_t j = 0; j < index.size(); ++j) slot.row(index[j]) += g.row(static_cast<Eigen::Index>(j));
  });
}

/// Rows flagged in `replace` are substituted by the 1 x n vector `with`.
template <typename Scalar>
Var<Scalar> replace_rows(Var<Scalar> a, std::vector<bool> replace, Var<Scalar> with) {
  if (with.rows() != 1 || with.cols() != a.cols() ||
      static_cast<Eigen::Index>(replace.size()) != a.rows()) {
    throw ShapeError("replace_rows shape mismatch: " + describe_shapes(a.value(), with.value()));
  }
  Matrix<Scalar> out = a.value();
  for (std::size_t j = 0; j < replace.size(); ++j) {
    if (replace[j]) out.row(static_cast<Eigen::Index>(j)) = with.value().row(0);
  }
  return a.tape->record(std::move(out), {a, with}, [a, with, replace = std::move(replace)](Tape<Scalar>& tp, const auto& g) {
    Matrix<Scalar> ga = g;
    Matrix<Scalar> gw = Matrix<Scalar>::Zero(1, g.cols());
    for (std::size_t j = 0; j < replace.size(); ++j) {
      if (!replace[j]) continue;
      gw += g.row(static_cast<Eigen::Index>(j));
      ga.row(static_cast<Eigen::Index>(j)).setZero();
    }
    tp.accumulate(a.id, ga);
    tp.accumulate(with.id, gw);
  });
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols of zero parts");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols shape mismatch: " + describe_shapes(parts.front().value(), p.value()));
    cols += p.cols();
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return parts.front().tape->record(std::move(out), parts, [parts](Tape<Scalar>& tp, const auto& g) {
    Eigen::Index off = 0;
    for (const auto& p : parts) {
      if (tp.needs_grad(p.id)) tp.accumulate(p.id, g.middleCols(off, p.cols()));
      off += p.cols();
    }
  });
}

template <typename Scalar>
Var<Scalar> slice_cols(Var<Scalar> a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw ShapeError("slice_cols [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") outside " + std::to_string(a.cols()) + " columns");
  }
  Matrix<Scalar> out = a.value().middleCols(start, count);
  return a.tape->record(std::move(out), {a}, [a, start, count](Tape<Scalar>& tp, const auto& g) {
    tp.grad_slot(a.id).middleCols(start, count) += g;
  });
}

template <typename Scalar>
Var<Scalar> transpose(Var<Scalar> a) {
  Matrix<Scalar> out = a.value().transpose();
  return a.tape->record(std::move(out), {a}, [a](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, g.transpose());
  });
}

/// Column means, 1 x n.
template <typename Scalar>
Var<Scalar> mean_rows(Var<Scalar> a) {
  const Scalar inv = Scalar(1) / static_cast<Scalar>(a.rows());
  Matrix<Scalar> out = a.value().colwise().sum() * inv;
  return a.tape->record(std::move(out), {a}, [a, inv](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, g.replicate(a.rows(), 1) * inv);
  });
}

template <typename Scalar>
Var<Scalar> sum(Var<Scalar> a) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape->record(std::move(out), {a}, [a](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, Matrix<Scalar>::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

template <typename Scalar>
Var<Scalar> sum_squares(Var<Scalar> a) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  return a.tape->record(std::move(out), {a}, [a](Tape<Scalar>& tp, const auto& g) {
    tp.accumulate(a.id, a.value() * (Scalar(2) * g(0, 0)));
  });
}

/// Elementwise clamp; the derivative is zero where the bound is active.
template <typename Scalar>
Var<Scalar> clamp(Var<Scalar> a, Scalar lo, Scalar hi) {
  Matrix<Scalar> out = a.value().cwiseMax(lo).cwiseMin(hi);
  return a.tape->record(std::move(out), {a}, [a, lo, hi](Tape<Scalar>& tp, const auto& g) {
    const auto& x = a.value();
    Matrix<Scalar> ga = g;
    for (Eigen::Index i = 0; i < ga.size(); ++i) {
      if (x.data()[i] < lo || x.data()[i] > hi) ga.data()[i] = Scalar(0);
    }
    tp.accumulate(a.id, ga);
  });
}

template <typename Scalar>
Var<Scalar> element(Var<Scalar> a, Eigen::Index r, Eigen::Index c) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value()(r, c);
  return a.tape->record(std::move(out), {a}, [a, r, c](Tape<Scalar>& tp, const auto& g) {
    tp.grad_slot(a.id)(r, c) += g(0, 0);
  });
}

/// (y - mu)^2 / (2 exp(log_var)) + log_var / 2 for 1 x 1 inputs.
template <typename Scalar>
Var<Scalar> gaussian_nll(Var<Scalar> mu, Var<Scalar> log_var, Scalar y) {
  const Scalar m = mu.scalar();
  const Scalar lv = log_var.scalar();
  const Scalar inv_var = std::exp(-lv);
  const Scalar r = y - m;
  Matrix<Scalar> out(1, 1);
  out(0, 0) = r * r * inv_var / Scalar(2) + lv / Scalar(2);
  return mu.tape->record(std::move(out), {mu, log_var}, [mu, log_var, r, inv_var](Tape<Scalar>& tp, const auto& g) {
    const Scalar go = g(0, 0);
    if (tp.needs_grad(mu.id)) tp.grad_slot(mu.id)(0, 0) += go * (-r * inv_var);
    if (tp.needs_grad(log_var.id)) tp.grad_slot(log_var.id)(0, 0) += go * (Scalar(0.5) - r * r * inv_var / Scalar(2));
  });
}

}  // namespace tet
