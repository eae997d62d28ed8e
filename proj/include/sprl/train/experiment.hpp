#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "sprl/train/trainer.hpp"

namespace sprl {

/// Every dataset a config names, read from disk, plus the embedding table
/// covering all of their tokens.
struct LoadedExperiment {
  TrainConfig config;
  std::filesystem::path base;
  TaskData target;
  std::vector<std::unique_ptr<TaskData>> auxiliary, pretrain;
  EmbeddingTable embeddings{kDefaultEmbeddingDim, 0};

  std::vector<const TaskData*> auxiliary_ptrs() const {
    std::vector<const TaskData*> out;
    for (const auto& t : auxiliary) out.push_back(t.get());
    return out;
  }

  std::vector<const TaskData*> pretrain_ptrs() const {
    std::vector<const TaskData*> out;
    for (const auto& t : pretrain) out.push_back(t.get());
    return out;
  }

  std::vector<const TaskData*> all() const {
    std::vector<const TaskData*> out{&target};
    for (const auto& t : auxiliary) out.push_back(t.get());
    for (const auto& t : pretrain) out.push_back(t.get());
    return out;
  }

  /// Every data file read, config-relative paths resolved.
  std::vector<std::string> data_files() const {
    std::vector<std::string> out;
    auto add = [&](const TaskSpec& s) {
      for (const auto* p : {&s.train, &s.dev, &s.test})
        if (!p->empty()) out.push_back(detail::resolve(*p, base));
    };
    add(config.target);
    for (const auto& t : config.auxiliary) add(t);
    for (const auto& t : config.pretrain) add(t);
    if (!config.embeddings.empty()) out.push_back(detail::resolve(config.embeddings, base));
    return out;
  }
};

/// Relative paths in the config are taken from `base`.
inline LoadedExperiment load_experiment(const TrainConfig& config, const std::filesystem::path& base) {
  config.validate();
  LoadedExperiment e;
  e.config = config;
  e.base = base;
  e.target = load_task(config.target, base);
  for (const auto& s : config.auxiliary) e.auxiliary.push_back(std::make_unique<TaskData>(load_task(s, base)));
  for (const auto& s : config.pretrain) e.pretrain.push_back(std::make_unique<TaskData>(load_task(s, base)));
  e.embeddings = build_embeddings(config, e.all(), detail::resolve(config.embeddings, base));
  return e;
}

inline ExperimentResult run_loaded(const LoadedExperiment& e, const Selector& select = default_selection) {
  return run_experiment(e.config, e.target, e.auxiliary_ptrs(), e.pretrain_ptrs(), e.embeddings, select);
}

}  // namespace sprl
