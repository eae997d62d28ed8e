#pragma once

#include <memory>

#include "sprl/core/ops.hpp"

namespace sprl {

// Gate blocks are laid out along the 4*hidden columns as [input | forget |
// candidate | output].

struct LstmState {
  Var h;
  Var c;
};

/// One step of a standard LSTM (no peepholes):
///   i, f, o = sigmoid(x Wx + h Wh + b) blocks, g = tanh(block),
///   c' = f*c + i*g, h' = o*tanh(c').
/// Built from primitive ops; `wx` is in x 4d, `wh` is d x 4d, `b` is 4d.
inline LstmState lstm_cell(Var x, Var h_prev, Var c_prev, Var wx, Var wh, Var b) {
  const std::size_t d = h_prev.size();
  if (wh.value().rows() != d || wh.value().cols() != 4 * d || wx.value().cols() != 4 * d ||
      b.size() != 4 * d || c_prev.size() != d || x.size() != wx.value().rows()) {
    throw DimensionError("lstm_cell: x " + shape_string(x.shape()) + ", h " + shape_string(h_prev.shape()) +
                         ", c " + shape_string(c_prev.shape()) + ", Wx " + shape_string(wx.shape()) +
                         ", Wh " + shape_string(wh.shape()) + ", b " + shape_string(b.shape()));
  }
  Var pre = add(add(matmul(x, wx), matmul(h_prev, wh)), b);
  Var i = sigmoid(slice_cols(pre, 0, d));
  Var f = sigmoid(slice_cols(pre, d, d));
  Var g = tanh(slice_cols(pre, 2 * d, d));
  Var o = sigmoid(slice_cols(pre, 3 * d, d));
  Var c = add(mul(f, c_prev), mul(i, g));
  Var h = mul(o, tanh(c));
  return {h, c};
}

namespace detail {

struct LstmCache {
  Matrix gates;     // n x 4d, post-activation
  Matrix cells;     // n x d
  Matrix tanh_c;    // n x d
  Matrix h_prev;    // n x d, state fed into each step (zeros first)
  bool reverse = false;
};

}  // namespace detail

/// Runs an LSTM over all rows of `x` (n x in) from zero initial state, left
/// to right or right to left. Row t of the result is the hidden state at
/// position t. The recurrence is fused into one node; its backward pass is
/// truncation-free BPTT with the weight gradients formed as single products.
inline Var lstm_sequence(Var x, Var wx, Var wh, Var b, bool reverse) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows();
  const std::size_t d = wh.value().rows();
  if (xv.cols() != wx.value().rows() || wx.value().cols() != 4 * d || wh.value().cols() != 4 * d ||
      b.size() != 4 * d) {
    throw DimensionError("lstm_sequence: x " + shape_string(xv.shape()) + ", Wx " +
                         shape_string(wx.shape()) + ", Wh " + shape_string(wh.shape()) + ", b " +
                         shape_string(b.shape()));
  }
  auto cache = std::make_shared<detail::LstmCache>();
  cache->reverse = reverse;
  Matrix pre_all = xv.mat() * wx.value().mat();
  pre_all.rowwise() += b.value().mat().row(0);
  cache->gates.resize(n, 4 * d);
  cache->cells.resize(n, d);
  cache->tanh_c.resize(n, d);
  cache->h_prev.resize(n, d);
  Matrix hs(n, d);

  const Matrix& whm = wh.value().mat();
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(d);
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(d);
  Eigen::RowVectorXd pre(4 * d);
  auto sig = [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  };
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    cache->h_prev.row(t) = h;
    pre.noalias() = pre_all.row(t);
    if (k > 0) pre.noalias() += h * whm;
    auto gate = cache->gates.row(t);
    for (std::size_t j = 0; j < d; ++j) {
      gate(j) = sig(pre(j));
      gate(d + j) = sig(pre(d + j));
      gate(2 * d + j) = std::tanh(pre(2 * d + j));
      gate(3 * d + j) = sig(pre(3 * d + j));
    }
    for (std::size_t j = 0; j < d; ++j) {
      c(j) = gate(d + j) * c(j) + gate(j) * gate(2 * d + j);
      const double tc = std::tanh(c(j));
      cache->tanh_c(t, j) = tc;
      h(j) = gate(3 * d + j) * tc;
    }
    cache->cells.row(t) = c;
    hs.row(t) = h;
  }

  return detail::make_node(
      OpKind::LstmSequence, {x, wx, wh, b}, Tensor::from_matrix(std::move(hs)),
      [cache, n, d](Graph& g, GraphNode& node) {
        const auto ix = node.parents[0], iwx = node.parents[1], iwh = node.parents[2], ib = node.parents[3];
        const Matrix& dH = node.grad.mat();
        const Matrix& whm = g.value(iwh).mat();
        Matrix dgates(n, 4 * d);
        Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(d);
        Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(d);
        for (std::size_t k = n; k-- > 0;) {
          const std::size_t t = cache->reverse ? n - 1 - k : k;
          const bool first = (k == 0);
          const std::size_t prev = cache->reverse ? t + 1 : t - 1;
          auto gate = cache->gates.row(t);
          auto dg = dgates.row(t);
          for (std::size_t j = 0; j < d; ++j) {
            const double i = gate(j), f = gate(d + j), cand = gate(2 * d + j), o = gate(3 * d + j);
            const double tc = cache->tanh_c(t, j);
            const double dh = dH(t, j) + dh_next(j);
            const double dout = dh * tc;
            const double dc = dc_next(j) + dh * o * (1.0 - tc * tc);
            const double c_prev = first ? 0.0 : cache->cells(prev, j);
            dg(j) = dc * cand * i * (1.0 - i);
            dg(d + j) = dc * c_prev * f * (1.0 - f);
            dg(2 * d + j) = dc * i * (1.0 - cand * cand);
            dg(3 * d + j) = dout * o * (1.0 - o);
            dc_next(j) = dc * f;
          }
          if (!first) dh_next.noalias() = dg * whm.transpose();
        }
        if (g.requires_grad(iwh)) g.grad_acc(iwh).noalias() += cache->h_prev.transpose() * dgates;
        if (g.requires_grad(iwx)) g.grad_acc(iwx).noalias() += g.value(ix).mat().transpose() * dgates;
        if (g.requires_grad(ib)) g.grad_acc(ib) += dgates.colwise().sum();
        if (g.requires_grad(ix)) g.grad_acc(ix).noalias() += dgates * g.value(iwx).mat().transpose();
      });
}

}  // namespace sprl
