#pragma once

#include <string>
#include <vector>

#include "sprl/data/sampling.hpp"
#include "sprl/io/csv.hpp"
#include "sprl/train/trainer.hpp"

namespace sprl {

enum class AblationMode { TargetOnly, CoTrain };

inline std::string to_string(AblationMode m) { return m == AblationMode::TargetOnly ? "target-only" : "co-train"; }

inline AblationMode parse_ablation_mode(const std::string& s) {
  if (s == "target-only") return AblationMode::TargetOnly;
  if (s == "co-train") return AblationMode::CoTrain;
  throw ConfigError("ablation mode must be target-only or co-train, got '" + s + "'");
}

struct AblationConfig {
  TrainConfig base;  // regime single; its seed is replaced per run
  std::string property;
  std::vector<double> fractions{kStandardFractions.begin(), kStandardFractions.end()};
  std::vector<AblationMode> modes{AblationMode::TargetOnly, AblationMode::CoTrain};
  std::vector<std::uint64_t> seeds{1};
  double cotrain_lambda = 0.1;  // weight of the other properties in co-train mode
};

/// The training task of one ablation cell. Target-only: the sampled
/// instances, loss on the target property alone. Co-train: every instance,
/// the target property weighted 1 where sampled and 0 elsewhere, the other
/// properties weighted `lambda` everywhere.
inline TaskData ablation_task(const TaskData& full, const std::string& property, const FractionSample& sample,
                              AblationMode mode, double lambda) {
  const std::size_t target = full.catalog.index_of(property);
  TaskData t;
  t.spec = full.spec;
  t.catalog = full.catalog;
  t.dev = full.dev;
  t.test = full.test;
  if (mode == AblationMode::TargetOnly) {
    t.train = take(full.train, sample.indices);
    std::vector<double> w(full.catalog.size(), 0.0);
    w[target] = 1.0;
    t.property_weights.assign(t.train.size(), w);
  } else {
    t.train = full.train;
    std::vector<double> w(full.catalog.size(), lambda);
    w[target] = 0.0;
    t.property_weights.assign(t.train.size(), w);
    for (auto i : sample.indices) t.property_weights[i][target] = 1.0;
  }
  return t;
}

inline bool has_positive(const TaskData& full, const std::string& property, const FractionSample& sample) {
  for (auto i : sample.indices)
    if (binary_label(full.train[i].labels.at(property))) return true;
  return false;
}

/// One row per (fraction, mode, seed): the target property's test F1 at the
/// epoch with the best dev F1 on that property. A sample without a positive
/// target label is still trained and reported, under metric "f1[no-positives]".
inline std::vector<MetricRow> ablation_run(const AblationConfig& ac, const TaskData& full,
                                           const EmbeddingTable& embeddings) {
  if (full.spec.kind != TaskKind::Spr || full.spec.mode != LabelMode::Binary)
    throw ConfigError("ablation needs a binary SPR task");
  if (!full.catalog.contains(ac.property))
    throw ConfigError("property '" + ac.property + "' is not in the task's catalog");
  if (ac.fractions.empty() || ac.modes.empty() || ac.seeds.empty())
    throw ConfigError("ablation needs at least one fraction, mode and seed");
  const std::string head = full.spec.name;
  const std::string prop = ac.property;
  const Selector select = [prop](const MetricsReport& r) { return r.properties.at(prop).prf.f1; };
  std::vector<MetricRow> rows;
  for (const auto seed : ac.seeds) {
    TrainConfig config = ac.base;
    config.seed = seed;
    config.target = full.spec;
    config.regime = Regime::Single;
    config.auxiliary.clear();
    config.pretrain.clear();
    const SeedBundle seeds = SeedBundle::from_master(seed);
    for (const double fraction : ac.fractions) {
      const FractionSample sample = sample_fraction(full.train.size(), fraction, seeds.subsample);
      const bool positives = has_positive(full, prop, sample);
      for (const auto mode : ac.modes) {
        const TaskData task = ablation_task(full, prop, sample, mode, ac.cotrain_lambda);
        const ExperimentResult r = run_experiment(config, task, {}, {}, embeddings, select);
        const auto model = restore_model(r.result.best);
        const MetricsReport test =
            evaluate_spr(*model, embeddings, head, LabelMode::Binary, full.test, "test", r.result.best.epoch);
        rows.push_back({prop, fraction, to_string(mode), seed, r.result.best.epoch, "test",
                        positives ? "f1" : "f1[no-positives]", test.properties.at(prop).prf.f1});
      }
    }
  }
  return rows;
}

}  // namespace sprl
