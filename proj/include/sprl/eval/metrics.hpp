#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sprl/core/errors.hpp"

namespace sprl {

struct BinaryCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }

  void add(bool predicted, bool gold) {
    if (predicted && gold) ++tp;
    else if (predicted) ++fp;
    else if (gold) ++fn;
    else ++tn;
  }

  BinaryCounts& operator+=(const BinaryCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }

  friend bool operator==(const BinaryCounts&, const BinaryCounts&) = default;
};

inline BinaryCounts count_predictions(std::span<const bool> predicted, std::span<const bool> gold) {
  if (predicted.size() != gold.size()) throw ContractError("predictions and golds differ in length");
  BinaryCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) c.add(predicted[i], gold[i]);
  return c;
}

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Zero denominators yield 0.
inline PrecisionRecall f1(const BinaryCounts& c) {
  PrecisionRecall r;
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

struct F1Aggregate {
  double micro = 0.0;
  double macro = 0.0;
};

inline F1Aggregate aggregate(const std::vector<BinaryCounts>& per_property) {
  if (per_property.empty()) throw ContractError("aggregate needs at least one property");
  BinaryCounts pooled;
  double macro = 0.0;
  for (const auto& c : per_property) {
    pooled += c;
    macro += f1(c).f1;
  }
  return {f1(pooled).f1, macro / static_cast<double>(per_property.size())};
}

struct Correlation {
  double r = 0.0;
  bool undefined = false;  // a vector had zero variance; r is reported as 0
};

/// Sample Pearson correlation.
inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("pearson: vectors differ in length");
  if (x.size() < 2) return {0.0, true};
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  const double r = sxy / std::sqrt(sxx * syy);
  return {std::max(-1.0, std::min(1.0, r)), false};
}

struct PropertyMetrics {
  std::optional<BinaryCounts> counts;
  PrecisionRecall prf;
  std::optional<Correlation> correlation;
};

/// Scores of one split at one epoch. Binary reports carry per-property
/// counts and micro/macro F1; scalar reports carry per-property Pearson and
/// its macro average.
struct MetricsReport {
  std::string split;
  int epoch = 0;
  bool scalar = false;
  std::map<std::string, PropertyMetrics> properties;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double macro_pearson = 0.0;

  /// Value used for model selection.
  double selection_value() const { return scalar ? macro_pearson : micro_f1; }
};

inline MetricsReport binary_report(const std::map<std::string, BinaryCounts>& counts, std::string split, int epoch) {
  MetricsReport r;
  r.split = std::move(split);
  r.epoch = epoch;
  std::vector<BinaryCounts> all;
  for (const auto& [prop, c] : counts) {
    r.properties[prop] = {c, f1(c), std::nullopt};
    all.push_back(c);
  }
  if (!all.empty()) {
    const auto agg = aggregate(all);
    r.micro_f1 = agg.micro;
    r.macro_f1 = agg.macro;
  }
  return r;
}

/// `predictions` and `golds` map each property to aligned value vectors.
inline MetricsReport scalar_report(const std::map<std::string, std::vector<double>>& predictions,
                                   const std::map<std::string, std::vector<double>>& golds, std::string split,
                                   int epoch) {
  MetricsReport r;
  r.split = std::move(split);
  r.epoch = epoch;
  r.scalar = true;
  double total = 0.0;
  for (const auto& [prop, pred] : predictions) {
    auto it = golds.find(prop);
    if (it == golds.end()) throw ContractError("no gold values for property '" + prop + "'");
    const Correlation c = pearson(pred, it->second);
    r.properties[prop] = {std::nullopt, {}, c};
    total += c.r;
  }
  if (!predictions.empty()) r.macro_pearson = total / static_cast<double>(predictions.size());
  return r;
}

}  // namespace sprl
