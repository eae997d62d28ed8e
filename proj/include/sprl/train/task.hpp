#pragma once

#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sprl/data/embeddings.hpp"
#include "sprl/data/instance.hpp"
#include "sprl/data/supersense.hpp"
#include "sprl/train/config.hpp"

namespace sprl {

/// A task's datasets in memory. SPR, PropBank and supersense tasks use
/// `train/dev/test`; translation uses the `*_pairs` lists.
struct TaskData {
  TaskSpec spec;
  PropertyCatalog catalog;  // SPR only
  std::vector<Instance> train, dev, test;
  std::vector<ParallelPair> train_pairs, dev_pairs;
  /// Optional per-training-instance, per-property loss weights (catalog
  /// order). Empty means every weight is 1.
  std::vector<std::vector<double>> property_weights;

  std::size_t train_size() const { return spec.kind == TaskKind::Mt ? train_pairs.size() : train.size(); }
};

inline void validate_task(const TaskData& t) {
  auto check = [&](const std::vector<Instance>& split, const char* which) {
    for (const auto& in : split) {
      switch (t.spec.kind) {
        case TaskKind::Spr:
          for (const auto& p : t.catalog.names()) {
            if (!in.labels.count(p))
              throw DataError(std::string(which) + " instance " + in.instance_id() + " of task '" + t.spec.name +
                              "' has no label for '" + p + "'");
          }
          break;
        case TaskKind::PropBank:
          if (!in.propbank_role)
            throw DataError(std::string(which) + " instance " + in.instance_id() + " has no PropBank role");
          break;
        case TaskKind::Supersense:
          if (!in.supersense || in.supersense->empty())
            throw DataError(std::string(which) + " instance " + in.instance_id() + " has no supersense annotation");
          break;
        case TaskKind::Mt: break;
      }
    }
  };
  check(t.train, "train");
  check(t.dev, "dev");
  check(t.test, "test");
  if (!t.property_weights.empty()) {
    if (t.property_weights.size() != t.train.size()) throw ContractError("property weights do not cover the training set");
    for (const auto& w : t.property_weights)
      if (w.size() != t.catalog.size()) throw ContractError("property weights do not match the catalog");
  }
}

/// Builds a task from in-memory data; the catalog defaults to the sorted
/// union of training label keys.
inline TaskData make_task(TaskSpec spec, std::vector<Instance> train, std::vector<Instance> dev = {},
                          std::vector<Instance> test = {}) {
  TaskData t;
  t.catalog = spec.properties.empty() ? catalog_from_instances(train) : PropertyCatalog(spec.properties);
  t.spec = std::move(spec);
  t.train = std::move(train);
  t.dev = std::move(dev);
  t.test = std::move(test);
  if (t.spec.kind == TaskKind::Spr && t.catalog.empty()) throw DataError("task '" + t.spec.name + "' has no properties");
  validate_task(t);
  return t;
}

inline TaskData make_mt_task(TaskSpec spec, std::vector<ParallelPair> train, std::vector<ParallelPair> dev = {}) {
  TaskData t;
  t.spec = std::move(spec);
  t.train_pairs = std::move(train);
  t.dev_pairs = std::move(dev);
  return t;
}

namespace detail {

inline std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  return p.is_absolute() ? path : (base / p).string();
}

}  // namespace detail

/// Reads a task's files; relative paths are taken from `base`.
inline TaskData load_task(const TaskSpec& spec, const std::filesystem::path& base = {}) {
  if (spec.train.empty()) throw ConfigError("task '" + spec.name + "' has no training file");
  if (spec.kind == TaskKind::Mt) {
    auto train = read_parallel(detail::resolve(spec.train, base));
    std::vector<ParallelPair> dev;
    if (!spec.dev.empty()) dev = read_parallel(detail::resolve(spec.dev, base));
    if (train.empty()) throw DataError("task '" + spec.name + "' has an empty training set");
    return make_mt_task(spec, std::move(train), std::move(dev));
  }
  auto read = [&](const std::string& p) {
    return p.empty() ? std::vector<Instance>{} : read_instances(detail::resolve(p, base));
  };
  auto train = read(spec.train);
  if (train.empty()) throw DataError("task '" + spec.name + "' has an empty training set");
  return make_task(spec, std::move(train), read(spec.dev), read(spec.test));
}

/// Every token any task can feed the encoder.
inline std::set<std::string> task_vocabulary(const std::vector<const TaskData*>& tasks) {
  std::set<std::string> vocab;
  for (const auto* t : tasks) {
    for (const auto* split : {&t->train, &t->dev, &t->test})
      for (const auto& in : *split) vocab.insert(in.tokens.begin(), in.tokens.end());
    for (const auto* split : {&t->train_pairs, &t->dev_pairs})
      for (const auto& p : *split) vocab.insert(p.source.begin(), p.source.end());
  }
  return vocab;
}

/// Training label vectors for one SPR instance in catalog order.
inline std::vector<bool> binary_targets(const Instance& in, const PropertyCatalog& catalog) {
  std::vector<bool> out(catalog.size());
  for (std::size_t j = 0; j < catalog.size(); ++j) out[j] = binary_label(in.labels.at(catalog.name(j)));
  return out;
}

inline std::vector<double> scalar_targets(const Instance& in, const PropertyCatalog& catalog) {
  std::vector<double> out(catalog.size());
  for (std::size_t j = 0; j < catalog.size(); ++j) out[j] = scalar_label(in.labels.at(catalog.name(j)));
  return out;
}

inline SupersenseDistribution supersense_target(const Instance& in) {
  return distribution_from_counts(*in.supersense);
}

}  // namespace sprl
