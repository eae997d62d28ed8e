#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sprl/core/ops.hpp"
#include "sprl/data/catalog.hpp"
#include "sprl/data/supersense.hpp"
#include "sprl/model/params.hpp"

namespace sprl {

enum class Activation { Relu, Tanh };

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("activation must be 'relu' or 'tanh', got '" + s + "'");
}

inline std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

inline Var activate(Activation a, Var x) { return a == Activation::Relu ? relu(x) : tanh(x); }

/// Two-layer perceptron over the pair state with a shared first layer:
///   score(attr) = W_attr[attr] . g(W_shared h_ea + b_shared) + b_attr[attr]
/// Row j of W_attr belongs to catalog property j.
class SprDecoder {
 public:
  SprDecoder(ParamStore& store, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim,
             PropertyCatalog catalog, Activation activation)
      : catalog_(std::move(catalog)),
        activation_(activation),
        w_shared_(&store.add(prefix + ".W_shared", {input_dim, hidden_dim})),
        b_shared_(&store.add(prefix + ".b_shared", {hidden_dim})),
        w_attr_(&store.add(prefix + ".W_attr", {catalog_.size(), hidden_dim})),
        b_attr_(&store.add(prefix + ".b_attr", {catalog_.size()})) {
    if (catalog_.empty()) throw ConfigError("SPR decoder needs at least one property");
  }

  const PropertyCatalog& catalog() const noexcept { return catalog_; }
  Activation activation() const noexcept { return activation_; }
  std::size_t input_dim() const { return w_shared_->value.rows(); }
  std::size_t hidden_dim() const { return w_shared_->value.cols(); }
  std::vector<Parameter*> parameters() const { return {w_shared_, b_shared_, w_attr_, b_attr_}; }
  Parameter& w_shared() const { return *w_shared_; }
  Parameter& b_shared() const { return *b_shared_; }
  Parameter& w_attr() const { return *w_attr_; }
  Parameter& b_attr() const { return *b_attr_; }

  /// Weights uniform in +-1/sqrt(fan_in); biases zero.
  void initialize(Rng& rng) const {
    init_uniform(*w_shared_, 1.0 / std::sqrt(static_cast<double>(input_dim())), rng);
    init_uniform(*w_attr_, 1.0 / std::sqrt(static_cast<double>(hidden_dim())), rng);
    b_shared_->value.set_zero();
    b_attr_->value.set_zero();
  }

  /// Vector of catalog().size() scores; the hidden layer is evaluated once.
  Var scores(Graph& g, Var pair) const {
    if (pair.size() != input_dim()) {
      throw DimensionError("SPR decoder expects a " + std::to_string(input_dim()) + "-dim pair state, got " +
                           shape_string(pair.shape()));
    }
    Var hidden = activate(activation_, add(matmul(pair, g.param(*w_shared_)), g.param(*b_shared_)));
    return add(matmul_t(hidden, g.param(*w_attr_)), g.param(*b_attr_));
  }

  std::map<std::string, double> score_map(Graph& g, Var pair) const {
    const Tensor s = scores(g, pair).value();
    std::map<std::string, double> out;
    for (std::size_t j = 0; j < catalog_.size(); ++j) out[catalog_.name(j)] = s[j];
    return out;
  }

 private:
  PropertyCatalog catalog_;
  Activation activation_;
  Parameter* w_shared_;
  Parameter* b_shared_;
  Parameter* w_attr_;
  Parameter* b_attr_;
};

inline double binary_prob(double score) {
  if (score >= 0) return 1.0 / (1.0 + std::exp(-score));
  const double e = std::exp(score);
  return e / (1.0 + e);
}

namespace detail {

inline std::vector<double> loss_weights(std::span<const double> weights, std::size_t n) {
  if (weights.empty()) return std::vector<double>(n, 1.0);
  if (weights.size() != n) throw ContractError("loss weights do not match the number of scores");
  return {weights.begin(), weights.end()};
}

}  // namespace detail

/// Sum over properties of -w_j log p(label_j), p(True) = sigmoid(score).
/// Empty `weights` means all ones.
inline Var binary_loss(Var scores, const std::vector<bool>& labels, std::span<const double> weights = {}) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw ContractError("binary_loss: labels do not match scores");
  const auto w = detail::loss_weights(weights, n);
  Tensor signs({n});
  Tensor neg_w({n});
  for (std::size_t j = 0; j < n; ++j) {
    signs[j] = labels[j] ? 1.0 : -1.0;
    neg_w[j] = -w[j];
  }
  Graph& g = scores.graph();
  return dot(log_sigmoid(mul(scores, g.input(std::move(signs)))), g.input(std::move(neg_w)));
}

/// Sum over properties of w_j (score_j - target_j)^2.
inline Var scalar_loss(Var scores, const std::vector<double>& targets, std::span<const double> weights = {}) {
  const std::size_t n = scores.size();
  if (targets.size() != n) throw ContractError("scalar_loss: targets do not match scores");
  const auto w = detail::loss_weights(weights, n);
  Graph& g = scores.graph();
  Var diff = sub(scores, g.input(Tensor::vector(targets)));
  return dot(square(diff), g.input(Tensor::vector(w)));
}

namespace detail {

template <class L>
void require_same_keys(const std::map<std::string, double>& scores, const std::map<std::string, L>& labels) {
  bool same = scores.size() == labels.size();
  for (auto a = scores.begin(), b = labels.begin(); same && a != scores.end(); ++a, ++b) same = a->first == b->first;
  if (!same) throw ContractError("scores and labels cover different properties");
}

}  // namespace detail

inline double binary_loss(const std::map<std::string, double>& scores, const std::map<std::string, bool>& labels) {
  detail::require_same_keys(scores, labels);
  double loss = 0.0;
  for (const auto& [prop, s] : scores) {
    const double z = labels.at(prop) ? s : -s;
    loss += -(std::min(z, 0.0) - std::log1p(std::exp(-std::abs(z))));
  }
  return loss;
}

inline double scalar_loss(const std::map<std::string, double>& scores, const std::map<std::string, double>& targets) {
  detail::require_same_keys(scores, targets);
  double loss = 0.0;
  for (const auto& [prop, s] : scores) loss += (s - targets.at(prop)) * (s - targets.at(prop));
  return loss;
}

/// Single-label classifier over the 16 abstract PropBank roles.
class PropBankDecoder {
 public:
  static constexpr std::size_t kRoles = kPropbankRoles.size();

  PropBankDecoder(ParamStore& store, const std::string& prefix, std::size_t input_dim)
      : w_(&store.add(prefix + ".W", {input_dim, kRoles})), b_(&store.add(prefix + ".b", {kRoles})) {}

  std::size_t input_dim() const { return w_->value.rows(); }
  std::vector<Parameter*> parameters() const { return {w_, b_}; }
  Parameter& weight() const { return *w_; }
  Parameter& bias() const { return *b_; }

  void initialize(Rng& rng) const {
    init_uniform(*w_, 1.0 / std::sqrt(static_cast<double>(input_dim())), rng);
    b_->value.set_zero();
  }

  Var logits(Graph& g, Var pair) const {
    if (pair.size() != input_dim()) throw DimensionError("PropBank decoder input has the wrong dimension");
    return add(matmul(pair, g.param(*w_)), g.param(*b_));
  }

  struct Output {
    Var distribution;
    Var loss;
  };

  /// Distribution over roles and -log p(gold).
  Output forward(Graph& g, Var pair, std::size_t gold) const {
    if (gold >= kRoles) throw BoundsError("PropBank role index " + std::to_string(gold) + " outside [0, 16)");
    Var z = logits(g, pair);
    return {softmax(z), scale(pick(log_softmax(z), gold), -1.0)};
  }

 private:
  Parameter* w_;
  Parameter* b_;
};

/// Distribution over the 26 supersenses from the argument state alone.
class SupersenseDecoder {
 public:
  static constexpr std::size_t kClasses = kSupersenses.size();

  SupersenseDecoder(ParamStore& store, const std::string& prefix, std::size_t input_dim)
      : w_(&store.add(prefix + ".W", {input_dim, kClasses})), b_(&store.add(prefix + ".b", {kClasses})) {}

  std::size_t input_dim() const { return w_->value.rows(); }
  std::vector<Parameter*> parameters() const { return {w_, b_}; }
  Parameter& weight() const { return *w_; }
  Parameter& bias() const { return *b_; }

  void initialize(Rng& rng) const {
    init_uniform(*w_, 1.0 / std::sqrt(static_cast<double>(input_dim())), rng);
    b_->value.set_zero();
  }

  Var logits(Graph& g, Var arg_state) const {
    if (arg_state.size() != input_dim()) throw DimensionError("supersense decoder input has the wrong dimension");
    return add(matmul(arg_state, g.param(*w_)), g.param(*b_));
  }

  struct Output {
    Var distribution;
    Var loss;
  };

  /// Predicted distribution and cross-entropy -sum_i gold_i log p_i.
  Output forward(Graph& g, Var arg_state, const SupersenseDistribution& gold) const {
    double total = 0.0;
    for (double p : gold) {
      if (p < 0.0) throw ContractError("gold supersense distribution has a negative entry");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) throw ContractError("gold supersense distribution is not normalized");
    Var z = logits(g, arg_state);
    Var gold_v = g.input(Tensor::vector(std::span<const double>(gold.data(), gold.size())));
    return {softmax(z), scale(dot(log_softmax(z), gold_v), -1.0)};
  }

 private:
  Parameter* w_;
  Parameter* b_;
};

}  // namespace sprl
