#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sprl/core/tensor.hpp"

namespace sprl {

/// A trainable tensor living outside any graph. Gradients accumulate into
/// `grad` across backward passes until `zero_grad` is called.
struct Parameter {
  Parameter(std::string name_, Shape shape) : name(std::move(name_)), value(shape), grad(shape) {}

  std::string name;
  Tensor value;
  Tensor grad;
  bool touched = false;  // received gradient since the last zero_grad

  void zero_grad() {
    if (touched) grad.set_zero();
    touched = false;
  }
};

enum class OpKind {
  Input,
  Param,
  MatMul,
  MatMulT,
  Add,
  AddRow,
  Sub,
  Mul,
  Scale,
  Sigmoid,
  Tanh,
  Relu,
  Log,
  Square,
  Exp,
  LogSigmoid,
  Softmax,
  LogSoftmax,
  Sum,
  Dot,
  Pick,
  Concat,
  SliceCols,
  Row,
  LstmSequence,
};

class Graph;

/// Handle to a node of a Graph.
class Var {
 public:
  Var() = default;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// One node of the computation graph: cached output, optional gradient,
/// parents and the closure that propagates the output gradient to them.
struct GraphNode {
  OpKind kind = OpKind::Input;
  std::vector<std::size_t> parents;
  Tensor value;
  Tensor grad;
  bool has_grad = false;
  bool requires_grad = false;
  Parameter* param = nullptr;
  std::function<void(Graph&, GraphNode&)> backward;
};

/// Reverse-mode tape. Nodes are appended in topological order, so the graph
/// is acyclic by construction and backward is a single reverse sweep.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Tensor value, bool requires_grad = false) {
    GraphNode n;
    n.kind = OpKind::Input;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return push(std::move(n));
  }

  /// Leaf bound to a parameter. The value is read in place and gradients
  /// accumulate straight into `p.grad`.
  Var param(Parameter& p) {
    GraphNode n;
    n.kind = OpKind::Param;
    n.param = &p;
    n.requires_grad = true;
    return push(std::move(n));
  }

  Var push(GraphNode node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
  }

  const Tensor& value(std::size_t id) const {
    const auto& n = nodes_[id];
    return n.param ? n.param->value : n.value;
  }

  const GraphNode& node(std::size_t id) const { return nodes_[id]; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Gradient accumulator of node `id`, zero-initialized on first use.
  Matrix& grad_acc(std::size_t id) {
    auto& n = nodes_[id];
    if (n.param) {
      n.param->touched = true;
      return n.param->grad.mat();
    }
    if (!n.has_grad) {
      n.grad = Tensor(n.value.shape());
      n.has_grad = true;
    }
    return n.grad.mat();
  }

  /// Gradient of a non-parameter node after backward (zeros if it was not
  /// reached). For parameter leaves read `Parameter::grad`.
  Tensor grad(Var v) const {
    const auto& n = nodes_[v.id()];
    if (n.param) return n.param->grad;
    if (n.has_grad) return n.grad;
    return Tensor(n.value.shape());
  }

  void backward(Var loss) {
    if (loss.size() != 1) {
      throw ContractError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
    }
    if (!nodes_[loss.id()].requires_grad) return;
    for (auto& n : nodes_) {
      n.has_grad = false;
    }
    grad_acc(loss.id())(0, 0) += 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.requires_grad || !n.has_grad || !n.backward) continue;
      n.backward(*this, n);
    }
  }

 private:
  std::deque<GraphNode> nodes_;  // stable addresses for Var::value() references
};

inline const Tensor& Var::value() const { return graph_->value(id_); }

namespace detail {

inline Var make_node(OpKind kind, std::initializer_list<Var> parents, Tensor value,
                     std::function<void(Graph&, GraphNode&)> backward) {
  Graph& g = parents.begin()->graph();
  GraphNode n;
  n.kind = kind;
  n.value = std::move(value);
  for (const Var& p : parents) {
    n.parents.push_back(p.id());
    n.requires_grad = n.requires_grad || g.requires_grad(p.id());
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return g.push(std::move(n));
}

inline Var make_node(OpKind kind, const std::vector<Var>& parents, Tensor value,
                     std::function<void(Graph&, GraphNode&)> backward) {
  Graph& g = parents.front().graph();
  GraphNode n;
  n.kind = kind;
  n.value = std::move(value);
  for (const Var& p : parents) {
    n.parents.push_back(p.id());
    n.requires_grad = n.requires_grad || g.requires_grad(p.id());
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return g.push(std::move(n));
}

inline void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

}  // namespace detail
}  // namespace sprl
