#pragma once

#include <vector>

#include "sprl/core/errors.hpp"
#include "sprl/core/random.hpp"

namespace sprl {

/// alpha = n_target / n_aux.
inline double mixing_weight(std::size_t n_target, std::size_t n_aux) {
  if (n_target == 0 || n_aux == 0) throw DomainError("mixing weight needs non-empty datasets");
  return static_cast<double>(n_target) / static_cast<double>(n_aux);
}

struct ScheduleItem {
  std::size_t task = 0;
  std::size_t index = 0;

  friend bool operator==(const ScheduleItem&, const ScheduleItem&) = default;
  friend auto operator<=>(const ScheduleItem&, const ScheduleItem&) = default;
};

/// One epoch's visiting order: a uniform random permutation of every
/// (task, instance) pair, so each task is drawn without replacement until
/// all instances have been seen.
inline std::vector<ScheduleItem> schedule_epoch(const std::vector<std::size_t>& task_sizes, Rng& rng) {
  if (task_sizes.empty()) throw DomainError("schedule needs at least one task");
  std::vector<ScheduleItem> items;
  for (std::size_t t = 0; t < task_sizes.size(); ++t)
    for (std::size_t i = 0; i < task_sizes[t]; ++i) items.push_back({t, i});
  if (items.empty()) throw DomainError("every task's training set is empty");
  shuffle(items, rng);
  return items;
}

}  // namespace sprl
