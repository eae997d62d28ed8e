#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <type_traits>
#include <unordered_map>

#include "sprl/core/graph.hpp"

namespace sprl {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates for one parameter plus its step counter.
struct AdamMoments {
  explicit AdamMoments(const Shape& shape) : first(shape), second(shape) {}
  Tensor first;
  Tensor second;
  std::int64_t step = 0;
};

namespace detail {

template <bool Clear>
void adam_kernel(Tensor& param, std::conditional_t<Clear, Tensor&, const Tensor&> grad, AdamMoments& state,
                 const AdamOptions& opt, double grad_scale) {
  if (!param.same_shape(grad) || !param.same_shape(state.first) || !param.same_shape(state.second)) {
    throw DimensionError("adam: parameter " + shape_string(param.shape()) + ", gradient " +
                         shape_string(grad.shape()) + ", moments " + shape_string(state.first.shape()));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(opt.beta1, t);
  const double bc2 = 1.0 - std::pow(opt.beta2, t);
  const double step_size = opt.learning_rate / bc1, inv_bc2 = 1.0 / bc2;
  const double b1 = opt.beta1, b2 = opt.beta2, eps = opt.epsilon;
  double* __restrict p = param.values().data();
  double* __restrict m = state.first.values().data();
  double* __restrict v = state.second.values().data();
  auto* __restrict g = grad.values().data();
  const std::size_t n = param.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double gk = grad_scale * g[k];
    m[k] = b1 * m[k] + (1.0 - b1) * gk;
    v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
    p[k] -= step_size * m[k] / (std::sqrt(v[k] * inv_bc2) + eps);
    if constexpr (Clear) g[k] = 0.0;
  }
}

}  // namespace detail

/// One bias-corrected Adam update of `param` in place, using `grad_scale`
/// times `grad` as the gradient. The step counter is advanced before the
/// bias corrections are formed.
inline void adam_update(Tensor& param, const Tensor& grad, AdamMoments& state, const AdamOptions& opt,
                        double grad_scale = 1.0) {
  detail::adam_kernel<false>(param, grad, state, opt, grad_scale);
}

/// Adam over a changing set of parameters. Moments are created lazily, so a
/// parameter's step counter only advances on steps where it is updated.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  const AdamOptions& options() const noexcept { return options_; }

  void step(std::span<Parameter* const> params, double grad_scale = 1.0) {
    for (Parameter* p : params) adam_update(p->value, p->grad, moments_for(*p), options_, grad_scale);
  }

  /// step() followed by zero_grad() on every parameter, in one sweep.
  void step_and_clear(std::span<Parameter* const> params, double grad_scale = 1.0) {
    for (Parameter* p : params) {
      detail::adam_kernel<true>(p->value, p->grad, moments_for(*p), options_, grad_scale);
      p->touched = false;
    }
  }

  const AdamMoments* moments(const Parameter& p) const {
    auto it = state_.find(&p);
    return it == state_.end() ? nullptr : &it->second;
  }

 private:
  AdamMoments& moments_for(const Parameter& p) {
    auto it = state_.find(&p);
    if (it == state_.end()) it = state_.emplace(&p, AdamMoments(p.value.shape())).first;
    return it->second;
  }

  AdamOptions options_;
  std::unordered_map<const Parameter*, AdamMoments> state_;
};

inline double grad_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const Parameter* p : params) sq += p->grad.mat().squaredNorm();
  return std::sqrt(sq);
}

/// Factor that brings a gradient of norm `norm` down to at most `max_norm`.
inline double clip_scale(double norm, double max_norm) {
  return max_norm > 0 && norm > max_norm ? max_norm / norm : 1.0;
}

/// Rescales gradients so their joint L2 norm is at most `max_norm`. Returns
/// the norm before clipping.
inline double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  const double norm = grad_norm(params);
  const double s = clip_scale(norm, max_norm);
  if (s != 1.0)
    for (Parameter* p : params) p->grad.mat() *= s;
  return norm;
}

}  // namespace sprl
