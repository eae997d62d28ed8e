#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sprl/core/errors.hpp"
#include "sprl/core/random.hpp"

namespace sprl {

/// Binary decisions for one property, keyed by instance id.
using Decisions = std::map<std::string, bool>;

struct DisagreementSample {
  std::vector<std::string> gold_true;
  std::vector<std::string> gold_false;
  bool shortfall = false;  // fewer disagreements existed than requested

  std::vector<std::string> ids() const {
    std::vector<std::string> out = gold_true;
    out.insert(out.end(), gold_false.begin(), gold_false.end());
    return out;
  }
};

namespace detail {

inline void require_same_instances(const Decisions& a, const Decisions& b, const Decisions& gold) {
  auto same = [](const Decisions& x, const Decisions& y) {
    if (x.size() != y.size()) return false;
    for (auto i = x.begin(), j = y.begin(); i != x.end(); ++i, ++j)
      if (i->first != j->first) return false;
    return true;
  };
  if (!same(a, b) || !same(a, gold)) throw ContractError("prediction files cover different instances");
}

inline std::vector<std::string> sample_ids(std::vector<std::string> pool, std::size_t n, Rng& rng) {
  shuffle(pool, rng);
  if (pool.size() > n) pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace detail

/// Uniform sample without replacement of up to `n_true` gold-True and
/// `n_false` gold-False instances on which the two systems disagree.
inline DisagreementSample disagreement_sample(const Decisions& a, const Decisions& b, const Decisions& gold,
                                              std::size_t n_true, std::size_t n_false, std::uint64_t seed) {
  detail::require_same_instances(a, b, gold);
  std::vector<std::string> pos, neg;
  for (const auto& [id, g] : gold) {
    if (a.at(id) == b.at(id)) continue;
    (g ? pos : neg).push_back(id);
  }
  DisagreementSample out;
  out.shortfall = pos.size() < n_true || neg.size() < n_false;
  Rng rng(seed);
  out.gold_true = detail::sample_ids(std::move(pos), n_true, rng);
  out.gold_false = detail::sample_ids(std::move(neg), n_false, rng);
  return out;
}

/// Disagreement cells between a baseline and a new system. On gold-True
/// instances exactly one system is correct: `new_true` counts the new
/// system, `baseline_true` the baseline; likewise for gold False.
struct ContingencyCells {
  long new_true = 0;
  long baseline_true = 0;
  long new_false = 0;
  long baseline_false = 0;
};

/// # differing instances and the net change in false negatives / false
/// positives of the new system relative to the baseline (negative means
/// fewer errors).
struct ContingencyDelta {
  long differ = 0;
  long delta_false_neg = 0;
  long delta_false_pos = 0;

  friend bool operator==(const ContingencyDelta&, const ContingencyDelta&) = default;
};

inline ContingencyDelta delta_from_cells(const ContingencyCells& c) {
  return {c.new_true + c.baseline_true + c.new_false + c.baseline_false, -(c.new_true - c.baseline_true),
          -(c.new_false - c.baseline_false)};
}

/// Cells over `subset` (all instances when empty). `baseline` is the
/// reference system, `system` the new one.
inline ContingencyCells contingency_cells(const Decisions& baseline, const Decisions& system, const Decisions& gold,
                                          const std::vector<std::string>& subset = {}) {
  detail::require_same_instances(baseline, system, gold);
  std::vector<std::string> ids = subset;
  if (ids.empty())
    for (const auto& [id, _] : gold) ids.push_back(id);
  std::set<std::string> seen;
  ContingencyCells c;
  for (const auto& id : ids) {
    auto it = gold.find(id);
    if (it == gold.end()) throw ContractError("subset names unknown instance '" + id + "'");
    if (!seen.insert(id).second) continue;
    const bool a = baseline.at(id), b = system.at(id);
    if (a == b) continue;
    const bool new_correct = b == it->second;
    if (it->second) ++(new_correct ? c.new_true : c.baseline_true);
    else ++(new_correct ? c.new_false : c.baseline_false);
  }
  return c;
}

inline ContingencyDelta contingency_delta(const Decisions& baseline, const Decisions& system, const Decisions& gold,
                                          const std::vector<std::string>& subset = {}) {
  return delta_from_cells(contingency_cells(baseline, system, gold, subset));
}

}  // namespace sprl
