#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sprl/core/graph.hpp"
#include "sprl/core/random.hpp"

namespace sprl {

/// Owns named parameters in creation order. Addresses are stable.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Shape shape) {
    if (index_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
    params_.push_back(std::make_unique<Parameter>(name, std::move(shape)));
    index_[name] = params_.size() - 1;
    return *params_.back();
  }

  Parameter* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }
  const Parameter* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  Parameter& at(const std::string& name) {
    if (auto* p = find(name)) return *p;
    throw LookupError("no parameter named '" + name + "'");
  }

  std::vector<Parameter*> all() const {
    std::vector<Parameter*> out;
    for (const auto& p : params_) out.push_back(p.get());
    return out;
  }

  std::vector<Parameter*> touched() const {
    std::vector<Parameter*> out;
    for (const auto& p : params_)
      if (p->touched) out.push_back(p.get());
    return out;
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  std::size_t size() const noexcept { return params_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

inline void init_uniform(Parameter& p, double range, Rng& rng) {
  for (double& v : p.value.values()) v = rng.uniform(-range, range);
}

}  // namespace sprl
