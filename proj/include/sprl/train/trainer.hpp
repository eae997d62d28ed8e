#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sprl/core/adam.hpp"
#include "sprl/eval/metrics.hpp"
#include "sprl/train/checkpoint.hpp"
#include "sprl/train/schedule.hpp"

namespace sprl {

namespace detail {

inline std::string item_id(const TaskData& task, std::size_t index) {
  if (task.spec.kind == TaskKind::Mt) return task.spec.name + ":pair" + std::to_string(index);
  return task.train.at(index).instance_id();
}

}  // namespace detail

/// Per-instance optimization on one model: builds the instance's loss,
/// backpropagates it, clips and applies Adam to the parameters it reached.
class Trainer {
 public:
  Trainer(Model& model, const EmbeddingTable& embeddings, AdamOptions options = {}, double clip_norm = 5.0)
      : model_(model), embeddings_(embeddings), adam_(options), clip_norm_(clip_norm) {}

  /// Unscaled loss of one training item of `task`.
  Var loss(Graph& g, const TaskData& task, std::size_t index) const {
    if (task.spec.kind == TaskKind::Mt) {
      const auto& pair = task.train_pairs.at(index);
      const auto& dec = model_.head_as<MtDecoder>(task.spec.name);
      return dec.sequence_loss(g, model_.encoder().encode(g, pair.source, embeddings_), pair.target);
    }
    const Instance& in = task.train.at(index);
    const EncodedSentence enc = model_.encoder().encode(g, in.tokens, embeddings_);
    switch (task.spec.kind) {
      case TaskKind::Spr: {
        const auto& dec = model_.head_as<SprDecoder>(task.spec.name);
        Var scores = dec.scores(g, pair_state(enc, in.pred_head, in.arg_head));
        std::span<const double> w;
        if (!task.property_weights.empty()) w = task.property_weights.at(index);
        if (task.spec.mode == LabelMode::Binary) return binary_loss(scores, binary_targets(in, dec.catalog()), w);
        return scalar_loss(scores, scalar_targets(in, dec.catalog()), w);
      }
      case TaskKind::PropBank: {
        const auto& dec = model_.head_as<PropBankDecoder>(task.spec.name);
        return dec.forward(g, pair_state(enc, in.pred_head, in.arg_head), propbank_role_index(*in.propbank_role))
            .loss;
      }
      case TaskKind::Supersense: {
        const auto& dec = model_.head_as<SupersenseDecoder>(task.spec.name);
        return dec.forward(g, row(enc.states, in.arg_head), supersense_target(in)).loss;
      }
      case TaskKind::Mt: break;
    }
    throw ContractError("unreachable task kind");
  }

  /// Forward and backward of `weight` times the item's loss, leaving the
  /// gradients in the parameters. Returns the unscaled loss.
  double accumulate(const TaskData& task, std::size_t index, double weight) {
    Graph g;
    Var l = loss(g, task, index);
    const double value = l.value().item();
    if (!std::isfinite(value)) throw DivergenceError(detail::item_id(task, index), value);
    g.backward(weight == 1.0 ? l : scale(l, weight));
    return value;
  }

  /// Clips and applies one Adam step to every parameter that received
  /// gradient, then clears the gradients.
  void apply() {
    const auto params = model_.store().touched();
    adam_.step_and_clear(params, clip_scale(grad_norm(params), clip_norm_));
  }

  /// One update on one item. A zero weight (or an item whose per-property
  /// weights are all zero) leaves the model untouched.
  double step(const TaskData& task, std::size_t index, double weight) {
    if (weight == 0.0) return 0.0;
    if (!task.property_weights.empty()) {
      const auto& w = task.property_weights.at(index);
      if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) return 0.0;
    }
    const double value = accumulate(task, index, weight);
    apply();
    return value;
  }

  const Adam& optimizer() const noexcept { return adam_; }

 private:
  Model& model_;
  const EmbeddingTable& embeddings_;
  Adam adam_;
  double clip_norm_;
};

/// Raw scores for each instance, catalog order.
inline std::vector<std::vector<double>> spr_scores(const Model& model, const EmbeddingTable& embeddings,
                                                   const std::string& head, const std::vector<Instance>& instances) {
  const auto& dec = model.head_as<SprDecoder>(head);
  std::vector<std::vector<double>> out;
  out.reserve(instances.size());
  for (const auto& in : instances) {
    Graph g;
    const EncodedSentence enc = model.encoder().encode(g, in.tokens, embeddings);
    const Tensor s = dec.scores(g, pair_state(enc, in.pred_head, in.arg_head)).value();
    out.emplace_back(s.values().begin(), s.values().end());
  }
  return out;
}

/// Metrics from precomputed scores. Binary mode: decision score > 0 against
/// the binary gold. Scalar mode: Pearson per property, plus F1 of the > 3
/// cut of both prediction and gold.
inline MetricsReport spr_report(const std::vector<std::vector<double>>& scores, const std::vector<Instance>& instances,
                                const PropertyCatalog& catalog, LabelMode mode, const std::string& split, int epoch) {
  if (scores.size() != instances.size()) throw ContractError("scores do not cover the instances");
  std::map<std::string, BinaryCounts> counts;
  std::map<std::string, std::vector<double>> preds, golds;
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    const std::string& prop = catalog.name(j);
    auto& c = counts[prop];
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const LabelValue& label = instances[i].labels.at(prop);
      if (mode == LabelMode::Binary) {
        c.add(scores[i][j] > 0.0, binary_label(label));
      } else {
        const double gold = scalar_label(label);
        c.add(binarize_scalar(scores[i][j]), binarize_scalar(gold));
        preds[prop].push_back(scores[i][j]);
        golds[prop].push_back(gold);
      }
    }
  }
  if (mode == LabelMode::Binary) return binary_report(counts, split, epoch);
  MetricsReport r = scalar_report(preds, golds, split, epoch);
  const MetricsReport cut = binary_report(counts, split, epoch);
  for (auto& [prop, m] : r.properties) {
    m.counts = cut.properties.at(prop).counts;
    m.prf = cut.properties.at(prop).prf;
  }
  r.micro_f1 = cut.micro_f1;
  r.macro_f1 = cut.macro_f1;
  return r;
}

inline MetricsReport evaluate_spr(const Model& model, const EmbeddingTable& embeddings, const std::string& head,
                                  LabelMode mode, const std::vector<Instance>& instances, const std::string& split,
                                  int epoch) {
  if (instances.empty()) throw DataError("cannot evaluate on an empty " + split + " set");
  const auto& catalog = model.head_as<SprDecoder>(head).catalog();
  return spr_report(spr_scores(model, embeddings, head, instances), instances, catalog, mode, split, epoch);
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean unscaled loss over the target task's items
  MetricsReport dev;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochRecord> history;
};

/// Maps a dev report to the number model selection maximizes.
using Selector = std::function<double(const MetricsReport&)>;

inline double default_selection(const MetricsReport& r) { return r.selection_value(); }

/// Weight of each task's loss: 1 for the target, alpha * lambda for an
/// auxiliary task (alpha = |target| / |aux| unless set explicitly).
inline std::vector<double> task_weights(const TaskData& target, const std::vector<const TaskData*>& auxiliary) {
  std::vector<double> w{1.0};
  for (const auto* t : auxiliary) {
    const double alpha = t->spec.alpha ? *t->spec.alpha : mixing_weight(target.train_size(), t->train_size());
    w.push_back(alpha * t->spec.lambda);
  }
  return w;
}

/// Trains the target (plus concurrent auxiliaries) for `epochs` epochs,
/// evaluating the target on dev after each one and keeping the best epoch
/// (strictly better only, so ties go to the earliest).
inline TrainResult train_stage(Model& model, const EmbeddingTable& embeddings, const TrainConfig& config,
                               const TaskData& target, const std::vector<const TaskData*>& auxiliary, int epochs,
                               std::uint64_t schedule_seed, const Selector& select = default_selection) {
  if (target.dev.empty()) throw DataError("target task '" + target.spec.name + "' has no dev set");
  std::vector<const TaskData*> tasks{&target};
  tasks.insert(tasks.end(), auxiliary.begin(), auxiliary.end());
  const auto weights = task_weights(target, auxiliary);
  std::vector<std::size_t> sizes;
  for (const auto* t : tasks) sizes.push_back(t->train_size());

  TrainResult result;
  auto dev_report = [&](int epoch) {
    return evaluate_spr(model, embeddings, target.spec.name, target.spec.mode, target.dev, "dev", epoch);
  };
  if (epochs == 0) {
    result.best = snapshot(model, config, 0, select(dev_report(0)));
    return result;
  }
  Trainer trainer(model, embeddings, AdamOptions{config.learning_rate}, config.clip_norm);
  Rng rng(schedule_seed);
  std::optional<double> best;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& item : schedule_epoch(sizes, rng)) {
      const double l = trainer.step(*tasks[item.task], item.index, weights[item.task]);
      if (item.task == 0) {
        total += l;
        ++count;
      }
    }
    EpochRecord rec{epoch, count ? total / static_cast<double>(count) : 0.0, dev_report(epoch)};
    const double value = select(rec.dev);
    if (!best || value > *best) {
      best = value;
      result.best = snapshot(model, config, epoch, value);
    }
    result.history.push_back(std::move(rec));
  }
  return result;
}

/// Trains one auxiliary task alone (a pretraining stage). Returns the mean
/// loss of each epoch.
inline std::vector<double> pretrain_stage(Model& model, const EmbeddingTable& embeddings, const TrainConfig& config,
                                          const TaskData& task, int epochs, std::uint64_t schedule_seed) {
  Trainer trainer(model, embeddings, AdamOptions{config.learning_rate}, config.clip_norm);
  Rng rng(schedule_seed);
  std::vector<double> losses;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    double total = 0.0;
    for (const auto& item : schedule_epoch({task.train_size()}, rng)) total += trainer.step(task, item.index, 1.0);
    losses.push_back(total / static_cast<double>(task.train_size()));
  }
  return losses;
}

inline std::uint64_t stage_seed(std::uint64_t schedule_seed, const std::string& stage) {
  std::uint64_t s = schedule_seed ^ fnv1a("pretrain:" + stage);
  return splitmix64(s);
}

struct ExperimentResult {
  TrainResult result;
  std::vector<std::vector<double>> pretrain_losses;  // one list per stage
};

/// Runs a full regime on loaded tasks: every pretraining stage in order
/// (each a fresh model whose encoder starts from the previous stage), then
/// the target stage with the target head, the auxiliary heads and the
/// carried-over encoder.
inline ExperimentResult run_experiment(const TrainConfig& config, const TaskData& target,
                                       const std::vector<const TaskData*>& auxiliary,
                                       const std::vector<const TaskData*>& pretrain, const EmbeddingTable& embeddings,
                                       const Selector& select = default_selection) {
  const SeedBundle seeds = SeedBundle::from_master(config.seed);
  ExperimentResult out;
  std::unique_ptr<Model> previous;
  for (const auto* stage : pretrain) {
    auto m = std::make_unique<Model>(config.model, config.embedding_dim,
                                     std::vector<HeadSpec>{head_spec(*stage, config.model.mt_vocab_size)});
    m->initialize(seeds.init);
    if (previous) copy_parameters(*previous, *m, encoder_parameter_names(*m));
    out.pretrain_losses.push_back(
        pretrain_stage(*m, embeddings, config, *stage, config.pretrain_epochs, stage_seed(seeds.schedule, stage->spec.name)));
    previous = std::move(m);
  }
  std::vector<HeadSpec> heads{head_spec(target, config.model.mt_vocab_size)};
  for (const auto* t : auxiliary) heads.push_back(head_spec(*t, config.model.mt_vocab_size));
  Model model(config.model, config.embedding_dim, heads);
  model.initialize(seeds.init);
  if (previous) copy_parameters(*previous, model, encoder_parameter_names(model));
  out.result = train_stage(model, embeddings, config, target, auxiliary, config.epochs, seeds.schedule, select);
  return out;
}

/// Pretrains the encoder on `aux_config`'s pretraining stages, then trains
/// `target_config` end to end starting from that encoder.
inline ExperimentResult pretrain_then_finetune(const TrainConfig& aux_config, const std::vector<const TaskData*>& stages,
                                               const TrainConfig& target_config, const TaskData& target,
                                               const EmbeddingTable& embeddings) {
  if (aux_config.model.hidden_dim != target_config.model.hidden_dim ||
      aux_config.embedding_dim != target_config.embedding_dim)
    throw ConfigError("pretraining and target stages disagree on encoder dimensions");
  TrainConfig merged = target_config;
  merged.pretrain_epochs = aux_config.pretrain_epochs;
  merged.pretrain.clear();
  for (const auto* s : stages) merged.pretrain.push_back(s->spec);
  if (merged.regime == Regime::Single) merged.regime = Regime::InitPretrain;
  if (merged.regime == Regime::Concurrent) merged.regime = Regime::Combined;
  merged.validate();
  return run_experiment(merged, target, {}, stages, embeddings);
}

/// Builds the embedding table for all tasks' tokens.
inline EmbeddingTable build_embeddings(const TrainConfig& config, const std::vector<const TaskData*>& tasks,
                                       const std::string& path) {
  return load_embeddings(path, task_vocabulary(tasks), SeedBundle::from_master(config.seed).oov,
                         config.embedding_dim);
}

}  // namespace sprl
