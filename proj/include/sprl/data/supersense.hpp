#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sprl/core/errors.hpp"
#include "sprl/data/catalog.hpp"

namespace sprl {

/// Probability vector over kSupersenses.
using SupersenseDistribution = std::array<double, kSupersenses.size()>;

/// Fine-grained sense -> the coarse supersenses it belongs to.
using SenseMap = std::map<std::string, std::vector<std::string>>;

/// Per-supersense number of annotators whose selected senses reach it. An
/// annotator counts at most once per supersense.
inline std::map<std::string, double> supersense_counts(const std::vector<std::vector<std::string>>& selections,
                                                       const SenseMap& sense_map) {
  std::map<std::string, double> counts;
  bool any = false;
  for (const auto& annotator : selections) {
    std::set<std::string> reached;
    for (const auto& sense : annotator) {
      auto it = sense_map.find(sense);
      if (it == sense_map.end() || it->second.empty())
        throw LookupError("fine sense '" + sense + "' has no supersense mapping");
      for (const auto& ss : it->second) {
        supersense_index(ss);
        reached.insert(ss);
      }
      any = true;
    }
    for (const auto& ss : reached) counts[ss] += 1.0;
  }
  if (!any) throw DataError("no sense selected by any annotator");
  return counts;
}

/// Normalizes supersense weights into a distribution.
inline SupersenseDistribution distribution_from_counts(const std::map<std::string, double>& counts) {
  SupersenseDistribution d{};
  double total = 0.0;
  for (const auto& [ss, c] : counts) {
    d[supersense_index(ss)] += c;
    total += c;
  }
  if (!(total > 0.0)) throw DataError("supersense weights sum to zero");
  for (double& p : d) p /= total;
  return d;
}

inline SupersenseDistribution supersense_distribution(const std::vector<std::vector<std::string>>& selections,
                                                      const SenseMap& sense_map) {
  return distribution_from_counts(supersense_counts(selections, sense_map));
}

/// exp of the Shannon entropy (natural log).
inline double perplexity(const SupersenseDistribution& d) {
  double h = 0.0;
  for (double p : d)
    if (p > 0.0) h -= p * std::log(p);
  return std::exp(h);
}

}  // namespace sprl
