#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sprl/core/graph.hpp"

namespace sprl {

namespace detail {

inline std::size_t parent(const GraphNode& n, std::size_t i) { return n.parents[i]; }

inline Tensor like(const Tensor& shape_of, Matrix m) {
  return Tensor::from_matrix(std::move(m), shape_of.is_vector());
}

inline Tensor unary_value(const Var& x, Matrix m) { return like(x.value(), std::move(m)); }

}  // namespace detail

/// Matrix product. A may be a vector (treated as a 1 x k row); B must be a
/// matrix. A vector A yields a vector result.
inline Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (bv.is_vector() || av.cols() != bv.rows()) {
    throw DimensionError("matmul: cannot multiply " + shape_string(av.shape()) + " by " +
                         shape_string(bv.shape()));
  }
  Matrix out = av.mat() * bv.mat();
  return detail::make_node(OpKind::MatMul, {a, b}, detail::like(av, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             const auto ia = n.parents[0], ib = n.parents[1];
                             const Matrix& dc = n.grad.mat();
                             if (g.requires_grad(ia))
                               g.grad_acc(ia).noalias() += dc * g.value(ib).mat().transpose();
                             if (g.requires_grad(ib))
                               g.grad_acc(ib).noalias() += g.value(ia).mat().transpose() * dc;
                           });
}

/// a * b^T, with b a matrix whose rows are the vectors being dotted.
inline Var matmul_t(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols()) {
    throw DimensionError("matmul_t: cannot multiply " + shape_string(av.shape()) +
                         " by transpose of " + shape_string(bv.shape()));
  }
  Matrix out = av.mat() * bv.mat().transpose();
  return detail::make_node(OpKind::MatMulT, {a, b}, detail::like(av, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             const auto ia = n.parents[0], ib = n.parents[1];
                             const Matrix& dc = n.grad.mat();
                             if (g.requires_grad(ia))
                               g.grad_acc(ia).noalias() += dc * g.value(ib).mat();
                             if (g.requires_grad(ib))
                               g.grad_acc(ib).noalias() += dc.transpose() * g.value(ia).mat();
                           });
}

inline Var add(Var a, Var b) {
  detail::require_same_shape(a, b, "add");
  Matrix out = a.value().mat() + b.value().mat();
  return detail::make_node(OpKind::Add, {a, b}, detail::like(a.value(), std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             for (auto p : n.parents)
                               if (g.requires_grad(p)) g.grad_acc(p) += n.grad.mat();
                           });
}

/// Adds the vector `bias` to every row of `m`.
inline Var add_row(Var m, Var bias) {
  const Tensor& mv = m.value();
  const Tensor& bv = bias.value();
  if (!bv.is_vector() || bv.size() != mv.cols()) {
    throw DimensionError("add_row: bias " + shape_string(bv.shape()) + " does not match " +
                         shape_string(mv.shape()));
  }
  Matrix out = mv.mat().rowwise() + bv.mat().row(0);
  return detail::make_node(OpKind::AddRow, {m, bias}, detail::like(mv, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             if (g.requires_grad(n.parents[0])) g.grad_acc(n.parents[0]) += n.grad.mat();
                             if (g.requires_grad(n.parents[1]))
                               g.grad_acc(n.parents[1]) += n.grad.mat().colwise().sum();
                           });
}

inline Var sub(Var a, Var b) {
  detail::require_same_shape(a, b, "sub");
  Matrix out = a.value().mat() - b.value().mat();
  return detail::make_node(OpKind::Sub, {a, b}, detail::like(a.value(), std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             if (g.requires_grad(n.parents[0])) g.grad_acc(n.parents[0]) += n.grad.mat();
                             if (g.requires_grad(n.parents[1])) g.grad_acc(n.parents[1]) -= n.grad.mat();
                           });
}

/// Elementwise product.
inline Var mul(Var a, Var b) {
  detail::require_same_shape(a, b, "mul");
  Matrix out = a.value().mat().cwiseProduct(b.value().mat());
  return detail::make_node(OpKind::Mul, {a, b}, detail::like(a.value(), std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             const auto ia = n.parents[0], ib = n.parents[1];
                             if (g.requires_grad(ia))
                               g.grad_acc(ia) += n.grad.mat().cwiseProduct(g.value(ib).mat());
                             if (g.requires_grad(ib))
                               g.grad_acc(ib) += n.grad.mat().cwiseProduct(g.value(ia).mat());
                           });
}

inline Var scale(Var x, double c) {
  Matrix out = x.value().mat() * c;
  return detail::make_node(OpKind::Scale, {x}, detail::unary_value(x, std::move(out)),
                           [c](Graph& g, GraphNode& n) { g.grad_acc(n.parents[0]) += n.grad.mat() * c; });
}

inline Var sigmoid(Var x) {
  Matrix out = x.value().mat().unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  return detail::make_node(OpKind::Sigmoid, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             const Matrix& y = n.value.mat();
                             g.grad_acc(n.parents[0]) +=
                                 n.grad.mat().cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
                           });
}

inline Var tanh(Var x) {
  Matrix out = x.value().mat().array().tanh().matrix();
  return detail::make_node(OpKind::Tanh, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             const auto y = n.value.mat().array();
                             g.grad_acc(n.parents[0]) +=
                                 (n.grad.mat().array() * (1.0 - y.square())).matrix();
                           });
}

inline Var relu(Var x) {
  Matrix out = x.value().mat().cwiseMax(0.0);
  return detail::make_node(OpKind::Relu, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             const auto& in = g.value(n.parents[0]).mat().array();
                             g.grad_acc(n.parents[0]) +=
                                 (n.grad.mat().array() * (in > 0.0).cast<double>()).matrix();
                           });
}

inline Var log(Var x) {
  const Matrix& in = x.value().mat();
  if ((in.array() <= 0.0).any()) throw DomainError("log of a non-positive value");
  Matrix out = in.array().log().matrix();
  return detail::make_node(OpKind::Log, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             g.grad_acc(n.parents[0]) +=
                                 (n.grad.mat().array() / g.value(n.parents[0]).mat().array()).matrix();
                           });
}

inline Var square(Var x) {
  Matrix out = x.value().mat().array().square().matrix();
  return detail::make_node(OpKind::Square, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             g.grad_acc(n.parents[0]) +=
                                 (2.0 * n.grad.mat().array() * g.value(n.parents[0]).mat().array()).matrix();
                           });
}

inline Var exp(Var x) {
  Matrix out = x.value().mat().array().exp().matrix();
  return detail::make_node(OpKind::Exp, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             g.grad_acc(n.parents[0]) += n.grad.mat().cwiseProduct(n.value.mat());
                           });
}

/// log(sigmoid(x)), evaluated without overflow for large |x|.
inline Var log_sigmoid(Var x) {
  Matrix out = x.value().mat().unaryExpr(
      [](double v) { return std::min(v, 0.0) - std::log1p(std::exp(-std::abs(v))); });
  return detail::make_node(OpKind::LogSigmoid, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             // d/dx log sigmoid(x) = 1 - sigmoid(x) = sigmoid(-x)
                             const Matrix s = g.value(n.parents[0]).mat().unaryExpr([](double v) {
                               if (v <= 0) return 1.0 / (1.0 + std::exp(v));
                               const double e = std::exp(-v);
                               return e / (1.0 + e);
                             });
                             g.grad_acc(n.parents[0]) += n.grad.mat().cwiseProduct(s);
                           });
}

namespace detail {

inline void require_row_vector(const Tensor& t, const char* op) {
  if (t.rows() != 1) throw DimensionError(std::string(op) + " expects a vector, got " + shape_string(t.shape()));
}

}  // namespace detail

/// Softmax of plain values, max-subtracted.
inline std::vector<double> softmax_values(std::span<const double> v) {
  if (v.empty()) throw DomainError("softmax of an empty vector");
  const double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += out[i] = std::exp(v[i] - mx);
  for (double& x : out) x /= total;
  return out;
}

/// Numerically stable softmax of a vector (max-subtracted).
inline Var softmax(Var x) {
  detail::require_row_vector(x.value(), "softmax");
  const auto& in = x.value().mat();
  Matrix out = (in.array() - in.maxCoeff()).exp().matrix();
  out /= out.sum();
  return detail::make_node(OpKind::Softmax, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             const Matrix& y = n.value.mat();
                             const double dot = n.grad.mat().cwiseProduct(y).sum();
                             g.grad_acc(n.parents[0]) +=
                                 (y.array() * (n.grad.mat().array() - dot)).matrix();
                           });
}

inline Var log_softmax(Var x) {
  detail::require_row_vector(x.value(), "log_softmax");
  const auto& in = x.value().mat();
  const double mx = in.maxCoeff();
  const double lse = mx + std::log((in.array() - mx).exp().sum());
  Matrix out = (in.array() - lse).matrix();
  return detail::make_node(OpKind::LogSoftmax, {x}, detail::unary_value(x, std::move(out)),
                           [](Graph& g, GraphNode& n) {
                             const double total = n.grad.mat().sum();
                             g.grad_acc(n.parents[0]) +=
                                 (n.grad.mat().array() - n.value.mat().array().exp() * total).matrix();
                           });
}

/// Sum of all entries, as a scalar.
inline Var sum(Var x) {
  const double s = x.value().mat().sum();
  return detail::make_node(OpKind::Sum, {x}, Tensor::scalar(s), [](Graph& g, GraphNode& n) {
    g.grad_acc(n.parents[0]).array() += n.grad[0];
  });
}

/// Inner product of two equally shaped tensors, as a scalar.
inline Var dot(Var a, Var b) {
  detail::require_same_shape(a, b, "dot");
  const double s = a.value().mat().cwiseProduct(b.value().mat()).sum();
  return detail::make_node(OpKind::Dot, {a, b}, Tensor::scalar(s), [](Graph& g, GraphNode& n) {
    const auto ia = n.parents[0], ib = n.parents[1];
    if (g.requires_grad(ia)) g.grad_acc(ia) += n.grad[0] * g.value(ib).mat();
    if (g.requires_grad(ib)) g.grad_acc(ib) += n.grad[0] * g.value(ia).mat();
  });
}

/// Entry `i` of a vector, as a scalar.
inline Var pick(Var x, std::size_t i) {
  detail::require_row_vector(x.value(), "pick");
  if (i >= x.size()) {
    throw BoundsError("pick: index " + std::to_string(i) + " out of range for length " +
                      std::to_string(x.size()));
  }
  return detail::make_node(OpKind::Pick, {x}, Tensor::scalar(x.value()[i]),
                           [i](Graph& g, GraphNode& n) { g.grad_acc(n.parents[0])(0, i) += n.grad[0]; });
}

/// Concatenation along the last axis. All parts share the row count; the
/// result is a vector iff the first part is.
inline Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat of nothing");
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.value().rows() != rows) throw DimensionError("concat: row counts differ");
    cols += p.value().cols();
  }
  Matrix out(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const auto c = p.value().cols();
    out.middleCols(off, c) = p.value().mat();
    offsets.push_back(off);
    off += c;
  }
  return detail::make_node(OpKind::Concat, parts, detail::like(parts.front().value(), std::move(out)),
                           [offsets](Graph& g, GraphNode& n) {
                             for (std::size_t k = 0; k < n.parents.size(); ++k) {
                               const auto p = n.parents[k];
                               if (!g.requires_grad(p)) continue;
                               const auto c = g.value(p).cols();
                               g.grad_acc(p) += n.grad.mat().middleCols(offsets[k], c);
                             }
                           });
}

inline Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  if (count == 0 || begin + count > x.value().cols()) {
    throw BoundsError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                      ") outside " + std::to_string(x.value().cols()) + " columns");
  }
  Matrix out = x.value().mat().middleCols(begin, count);
  return detail::make_node(OpKind::SliceCols, {x}, detail::unary_value(x, std::move(out)),
                           [begin, count](Graph& g, GraphNode& n) {
                             g.grad_acc(n.parents[0]).middleCols(begin, count) += n.grad.mat();
                           });
}

/// Row `r` of a matrix, as a vector.
inline Var row(Var m, std::size_t r) {
  if (m.value().is_vector() || r >= m.value().rows()) {
    throw BoundsError("row: index " + std::to_string(r) + " out of range for " +
                      shape_string(m.shape()));
  }
  Matrix out = m.value().mat().row(r);
  return detail::make_node(OpKind::Row, {m}, Tensor::from_matrix(std::move(out), true),
                           [r](Graph& g, GraphNode& n) { g.grad_acc(n.parents[0]).row(r) += n.grad.mat(); });
}

enum class Pointwise { Sigmoid, Tanh, Relu, Log, Square };

inline Var pointwise(Pointwise kind, Var x) {
  switch (kind) {
    case Pointwise::Sigmoid: return sigmoid(x);
    case Pointwise::Tanh: return tanh(x);
    case Pointwise::Relu: return relu(x);
    case Pointwise::Log: return log(x);
    case Pointwise::Square: return square(x);
  }
  throw ContractError("unknown pointwise kind");
}

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace sprl
