#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sprl/sprl.hpp"

using namespace sprl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sprl_test_training" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrainConfig small_config(std::uint64_t seed = 1) {
  TrainConfig c;
  c.seed = seed;
  c.epochs = 2;
  c.pretrain_epochs = 2;
  c.embedding_dim = 6;
  c.model.hidden_dim = 8;
  c.model.shared_dim = 6;
  c.model.mt_embed_dim = 6;
  c.model.mt_layers = 1;
  c.model.mt_vocab_size = 60;
  c.target.name = "syn";
  return c;
}

TaskData synthetic_task(std::size_t n, std::uint64_t seed, const std::string& name = "syn") {
  auto d = synthetic_dataset(n, seed);
  TaskSpec spec;
  spec.name = name;
  return make_task(spec, std::move(d.train), std::move(d.dev), std::move(d.test));
}

TaskData copy_task(std::size_t n, std::uint64_t seed) {
  const auto d = synthetic_dataset(n, seed);
  std::vector<ParallelPair> pairs;
  for (const auto& in : d.train) pairs.push_back({in.tokens, in.tokens});
  TaskSpec spec;
  spec.name = "mt";
  spec.kind = TaskKind::Mt;
  spec.role = TaskRole::Auxiliary;
  return make_mt_task(spec, std::move(pairs));
}

EmbeddingTable table_for(const TrainConfig& c, const std::vector<const TaskData*>& tasks) {
  return build_embeddings(c, tasks, "");
}

std::unique_ptr<Model> fresh_model(const TrainConfig& c, const std::vector<const TaskData*>& tasks) {
  std::vector<HeadSpec> heads;
  for (const auto* t : tasks) heads.push_back(head_spec(*t, c.model.mt_vocab_size));
  auto m = std::make_unique<Model>(c.model, c.embedding_dim, heads);
  m->initialize(SeedBundle::from_master(c.seed).init);
  return m;
}

std::map<std::string, Tensor> values_of(const Model& m) {
  std::map<std::string, Tensor> out;
  for (const auto* p : m.store().all()) out.emplace(p->name, p->value);
  return out;
}

std::map<std::string, Tensor> grads_of(const Model& m) {
  std::map<std::string, Tensor> out;
  for (const auto* p : m.store().all()) out.emplace(p->name, p->grad);
  return out;
}

void expect_same_history(const TrainResult& a, const TrainResult& b) {
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(report_rows(a.history[i].dev), report_rows(b.history[i].dev));
  }
  EXPECT_EQ(a.best.epoch, b.best.epoch);
  EXPECT_EQ(a.best.dev_metric, b.best.dev_metric);
  EXPECT_EQ(a.best.tensors, b.best.tensors);
}

bool contains_word(const auto& list, const std::string& w) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

}  // namespace

// ---- mixing weight and schedule ----

TEST(MixingWeight, Ratio) {
  EXPECT_EQ(mixing_weight(1000, 4000), 0.25);
  EXPECT_EQ(mixing_weight(77, 77), 1.0);
  EXPECT_EQ(mixing_weight(9738, 6091), 9738.0 / 6091.0);
  EXPECT_NEAR(mixing_weight(9738, 6091), 1.5988, 5e-5);
  EXPECT_THROW(mixing_weight(0, 5), DomainError);
  EXPECT_THROW(mixing_weight(5, 0), DomainError);
}

TEST(Schedule, SingleTaskIsPermutation) {
  Rng rng(3);
  const auto s = schedule_epoch({9}, rng);
  std::vector<std::size_t> idx;
  for (const auto& it : s) {
    EXPECT_EQ(it.task, 0u);
    idx.push_back(it.index);
  }
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(idx[i], i);
}

TEST(Schedule, UnionMultisetEveryEpoch) {
  Rng rng(11);
  std::vector<ScheduleItem> expected;
  for (std::size_t i = 0; i < 3; ++i) expected.push_back({0, i});
  for (std::size_t i = 0; i < 5; ++i) expected.push_back({1, i});
  for (int e = 0; e < 20; ++e) {
    auto s = schedule_epoch({3, 5}, rng);
    ASSERT_EQ(s.size(), 8u);
    std::sort(s.begin(), s.end());
    EXPECT_EQ(s, expected);
  }
}

TEST(Schedule, EmptyIsDomainError) {
  Rng rng(1);
  EXPECT_THROW(schedule_epoch({}, rng), DomainError);
  EXPECT_THROW(schedule_epoch({0, 0}, rng), DomainError);
}

TEST(Schedule, OrderingFrequenciesUniform) {
  // sizes (2,2): 4! equally likely orderings
  Rng rng(2024);
  const int epochs = 10000;
  std::map<std::vector<ScheduleItem>, int> freq;
  for (int e = 0; e < epochs; ++e) ++freq[schedule_epoch({2, 2}, rng)];
  ASSERT_EQ(freq.size(), 24u);
  const double p = 1.0 / 24.0;
  const double mean = epochs * p, sigma = std::sqrt(epochs * p * (1 - p));
  for (const auto& [order, n] : freq) EXPECT_LE(std::abs(n - mean), 3 * sigma);

  // the task-interleaving pattern: C(4,2) = 6 patterns
  std::map<std::vector<std::size_t>, int> patterns;
  for (const auto& [order, n] : freq) {
    std::vector<std::size_t> t;
    for (const auto& it : order) t.push_back(it.task);
    patterns[t] += n;
  }
  ASSERT_EQ(patterns.size(), 6u);
  const double q = 1.0 / 6.0;
  for (const auto& [pat, n] : patterns)
    EXPECT_LE(std::abs(n - epochs * q), 3 * std::sqrt(epochs * q * (1 - q)));
}

// ---- per-instance steps ----

class StepTest : public ::testing::Test {
 protected:
  TrainConfig config = small_config();
  TaskData task = synthetic_task(40, 5);
  EmbeddingTable emb = table_for(config, {&task});
};

TEST_F(StepTest, ZeroWeightLeavesParameters) {
  auto m = fresh_model(config, {&task});
  const auto before = values_of(*m);
  Trainer t(*m, emb);
  EXPECT_EQ(t.step(task, 0, 0.0), 0.0);
  EXPECT_EQ(values_of(*m), before);
}

TEST_F(StepTest, AllZeroPropertyWeightsLeaveParameters) {
  TaskData weighted = task;
  weighted.property_weights.assign(weighted.train.size(), std::vector<double>(weighted.catalog.size(), 0.0));
  auto m = fresh_model(config, {&weighted});
  const auto before = values_of(*m);
  Trainer t(*m, emb);
  t.step(weighted, 3, 1.0);
  EXPECT_EQ(values_of(*m), before);
}

TEST_F(StepTest, UnitWeightMatchesUnweightedStep) {
  auto a = fresh_model(config, {&task});
  auto b = fresh_model(config, {&task});
  Trainer ta(*a, emb);
  ta.step(task, 2, 1.0);

  Graph g;
  Trainer tb(*b, emb);
  Var l = tb.loss(g, task, 2);
  g.backward(l);
  tb.apply();
  EXPECT_EQ(values_of(*a), values_of(*b));
}

TEST_F(StepTest, GradientsScaleLinearlyWithWeight) {
  auto m = fresh_model(config, {&task});
  Trainer t(*m, emb);
  t.accumulate(task, 1, 1.0);
  const auto g1 = grads_of(*m);
  m->store().zero_grad();
  t.accumulate(task, 1, 0.1);
  const auto g01 = grads_of(*m);
  m->store().zero_grad();
  t.accumulate(task, 1, 2.0);
  const auto g2 = grads_of(*m);

  std::size_t nonzero = 0;
  for (const auto& [name, g] : g1) {
    const auto& a = g.values();
    const auto& b = g01.at(name).values();
    const auto& c = g2.at(name).values();
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_NEAR(b[k], 0.1 * a[k], 1e-12 * std::abs(a[k]) + 1e-300) << name;
      EXPECT_EQ(c[k], 2.0 * a[k]) << name;  // power of two: exact
      nonzero += a[k] != 0.0;
    }
  }
  EXPECT_GT(nonzero, 0u);
}

TEST_F(StepTest, StepTouchesOnlyReachedParameters) {
  TaskData other = synthetic_task(20, 6, "other");
  auto m = fresh_model(config, {&task, &other});
  const auto before = values_of(*m);
  Trainer t(*m, emb);
  t.step(task, 0, 1.0);
  const auto after = values_of(*m);
  for (const auto& [name, v] : before) {
    if (name.rfind("other.", 0) == 0) EXPECT_EQ(after.at(name), v) << name;
    if (name.rfind("syn.", 0) == 0) EXPECT_NE(after.at(name), v) << name;
  }
}

TEST_F(StepTest, NonFiniteLossNamesInstance) {
  auto m = fresh_model(config, {&task});
  for (auto* p : m->store().all())
    if (p->name.rfind("syn.", 0) == 0) p->value.values()[0] = std::nan("");
  Trainer t(*m, emb);
  try {
    t.step(task, 4, 1.0);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.instance_id(), task.train[4].instance_id());
    EXPECT_EQ(e.exit_code(), 3);
  }
}

TEST_F(StepTest, MtItemIdOnDivergence) {
  const TaskData mt = copy_task(10, 2);
  auto m = fresh_model(config, {&mt});
  for (auto* p : m->store().all())
    if (p->name.rfind("mt.", 0) == 0) std::fill(p->value.values().begin(), p->value.values().end(), std::nan(""));
  const EmbeddingTable e = table_for(config, {&mt});
  Trainer t(*m, e);
  try {
    t.step(mt, 3, 1.0);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& err) {
    EXPECT_EQ(err.instance_id(), "mt:pair3");
  }
}

TEST_F(StepTest, TaskWeightsAreAlphaTimesLambda) {
  TaskData aux = synthetic_task(10, 7, "aux");
  aux.spec.role = TaskRole::Auxiliary;
  aux.spec.lambda = 0.01;
  const auto w = task_weights(task, {&aux});
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[1], mixing_weight(task.train.size(), aux.train.size()) * 0.01);
  aux.spec.alpha = 0.5;
  EXPECT_EQ(task_weights(task, {&aux})[1], 0.5 * 0.01);
}

// ---- training loop ----

class TrainLoopTest : public ::testing::Test {
 protected:
  TrainConfig config = small_config();
  TaskData task = synthetic_task(60, 9);
  EmbeddingTable emb = table_for(config, {&task});
};

TEST_F(TrainLoopTest, ZeroEpochsReturnsInitialization) {
  config.epochs = 0;
  const auto r = run_experiment(config, task, {}, {}, emb);
  EXPECT_TRUE(r.result.history.empty());
  EXPECT_EQ(r.result.best.epoch, 0);
  auto m = fresh_model(config, {&task});
  const auto init = values_of(*m);
  for (const auto& [name, t] : r.result.best.tensors) EXPECT_EQ(t, init.at(name)) << name;
}

TEST_F(TrainLoopTest, SameSeedIsBitIdentical) {
  const auto a = run_experiment(config, task, {}, {}, emb);
  const auto b = run_experiment(config, task, {}, {}, emb);
  expect_same_history(a.result, b.result);
  ASSERT_EQ(a.result.history.size(), 2u);
}

TEST_F(TrainLoopTest, DifferentSeedDiffers) {
  const auto a = run_experiment(config, task, {}, {}, emb);
  config.seed = 2;
  const auto b = run_experiment(config, task, {}, {}, emb);
  EXPECT_NE(a.result.history[0].train_loss, b.result.history[0].train_loss);
}

TEST_F(TrainLoopTest, BestIsArgmaxOfHistory) {
  config.epochs = 4;
  const auto r = run_experiment(config, task, {}, {}, emb).result;
  double best = -1;
  int epoch = 0;
  for (const auto& e : r.history)
    if (e.dev.selection_value() > best) {
      best = e.dev.selection_value();
      epoch = e.epoch;
    }
  EXPECT_EQ(r.best.epoch, epoch);
  EXPECT_EQ(r.best.dev_metric, best);
}

TEST_F(TrainLoopTest, TiesGoToEarliestEpoch) {
  config.epochs = 3;
  const Selector constant = [](const MetricsReport&) { return 0.5; };
  const auto r = run_experiment(config, task, {}, {}, emb, constant).result;
  EXPECT_EQ(r.best.epoch, 1);
}

TEST_F(TrainLoopTest, ReevaluatingBestReproducesDevMetric) {
  config.epochs = 3;
  const auto r = run_experiment(config, task, {}, {}, emb).result;
  const auto m = restore_model(r.best);
  const auto dev = evaluate_spr(*m, emb, "syn", LabelMode::Binary, task.dev, "dev", r.best.epoch);
  EXPECT_EQ(dev.selection_value(), r.best.dev_metric);
  EXPECT_EQ(report_rows(dev), report_rows(r.history[r.best.epoch - 1].dev));
}

TEST_F(TrainLoopTest, ConcurrentWithoutAuxiliariesEqualsSingle) {
  const auto a = run_experiment(config, task, {}, {}, emb);
  config.regime = Regime::Concurrent;
  const auto b = run_experiment(config, task, {}, {}, emb);
  expect_same_history(a.result, b.result);
}

TEST_F(TrainLoopTest, ZeroLambdaAuxiliaryLeavesTargetTraining) {
  TaskData aux = synthetic_task(30, 8, "aux");
  aux.spec.role = TaskRole::Auxiliary;
  aux.spec.lambda = 0.0;
  const EmbeddingTable e = table_for(config, {&task, &aux});
  config.regime = Regime::Concurrent;
  const auto r = run_experiment(config, task, {&aux}, {}, e);
  // aux head never moves from its initialization
  auto m = fresh_model(config, {&task, &aux});
  const auto init = values_of(*m);
  for (const auto& [name, t] : r.result.best.tensors)
    if (name.rfind("aux.", 0) == 0) EXPECT_EQ(t, init.at(name)) << name;
}

TEST_F(TrainLoopTest, ScalarModeSelectsOnPearson) {
  auto d = synthetic_dataset(60, 9);
  auto to_scalar = [](std::vector<Instance>& v) {
    for (auto& in : v)
      for (auto& [k, l] : in.labels) l = binary_label(l) ? 5.0 : 1.0;
  };
  to_scalar(d.train);
  to_scalar(d.dev);
  TaskSpec spec;
  spec.name = "syn";
  spec.mode = LabelMode::Scalar;
  const TaskData scalar = make_task(spec, d.train, d.dev);
  config.target = spec;
  const auto r = run_experiment(config, scalar, {}, {}, emb).result;
  for (const auto& e : r.history) EXPECT_TRUE(e.dev.scalar);
  EXPECT_EQ(r.best.dev_metric, r.history[r.best.epoch - 1].dev.macro_pearson);
}

TEST_F(TrainLoopTest, MissingDevIsDataError) {
  TaskData no_dev = task;
  no_dev.dev.clear();
  EXPECT_THROW(run_experiment(config, no_dev, {}, {}, emb), DataError);
}

// ---- pretraining ----

class PretrainTest : public ::testing::Test {
 protected:
  TrainConfig config = small_config();
  TaskData task = synthetic_task(60, 13);
  TaskData mt = copy_task(50, 14);
  EmbeddingTable emb = table_for(config, {&task, &mt});

  TrainConfig with_pretrain(int pretrain_epochs) const {
    TrainConfig c = config;
    c.regime = Regime::InitPretrain;
    c.pretrain = {mt.spec};
    c.pretrain_epochs = pretrain_epochs;
    return c;
  }
};

TEST_F(PretrainTest, ZeroPretrainEpochsEqualsPlainTraining) {
  const auto plain = run_experiment(config, task, {}, {}, emb);
  const auto pre = run_experiment(with_pretrain(0), task, {}, {&mt}, emb);
  expect_same_history(plain.result, pre.result);
}

TEST_F(PretrainTest, EncoderCarriesOverExactly) {
  TrainConfig c = with_pretrain(2);
  c.epochs = 0;
  const auto r = run_experiment(c, task, {}, {&mt}, emb);
  ASSERT_EQ(r.pretrain_losses.size(), 1u);
  ASSERT_EQ(r.pretrain_losses[0].size(), 2u);

  auto m = fresh_model(c, {&mt});
  const auto init = values_of(*m);
  const SeedBundle seeds = SeedBundle::from_master(c.seed);
  const auto losses = pretrain_stage(*m, emb, c, mt, 2, stage_seed(seeds.schedule, "mt"));
  EXPECT_EQ(losses, r.pretrain_losses[0]);
  const auto pretrained = values_of(*m);

  std::size_t checked = 0;
  for (const auto& [name, t] : r.result.best.tensors) {
    if (name.rfind("encoder.", 0) != 0) continue;
    EXPECT_EQ(t, pretrained.at(name)) << name;
    EXPECT_NE(t, init.at(name)) << name;
    ++checked;
  }
  EXPECT_GT(checked, 0u);
  for (const auto& h : r.result.best.heads) EXPECT_NE(h.name, "mt");
}

TEST_F(PretrainTest, ChainedStagesRunInOrder) {
  TaskData pb = synthetic_task(30, 15, "pb");
  for (auto* split : {&pb.train, &pb.dev, &pb.test})
    for (auto& in : *split) in.propbank_role = binary_label(in.labels.at("animate")) ? "PAG" : "PPT";
  pb.spec.kind = TaskKind::PropBank;
  pb.spec.role = TaskRole::Auxiliary;
  const EmbeddingTable e = table_for(config, {&task, &mt, &pb});
  TrainConfig c = with_pretrain(1);
  c.pretrain.push_back(pb.spec);
  EXPECT_EQ(condition_name(c), "mt:pb:syn");
  const auto r = run_experiment(c, task, {}, {&mt, &pb}, e);
  EXPECT_EQ(r.pretrain_losses.size(), 2u);
  EXPECT_EQ(r.result.history.size(), 2u);
}

TEST_F(PretrainTest, DimensionMismatchIsConfigError) {
  TrainConfig aux = with_pretrain(1);
  aux.model.hidden_dim = 10;
  EXPECT_THROW(pretrain_then_finetune(aux, {&mt}, config, task, emb), ConfigError);
}

TEST_F(PretrainTest, PretrainThenFinetuneMatchesInitRegime) {
  const auto a = pretrain_then_finetune(with_pretrain(1), {&mt}, config, task, emb);
  const auto b = run_experiment(with_pretrain(1), task, {}, {&mt}, emb);
  expect_same_history(a.result, b.result);
}

TEST(PretrainBenefit, CopyTaskLowersFirstEpochLoss) {
  // paired seeds: same target data, init and schedule; only the encoder start differs
  double plain_sum = 0, pre_sum = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig c = small_config(seed);
    c.epochs = 1;
    c.embedding_dim = 8;
    c.model.hidden_dim = 12;
    c.model.shared_dim = 8;
    c.model.mt_embed_dim = 8;
    c.learning_rate = 5e-3;
    const TaskData task = synthetic_task(100, 100 + seed);
    const TaskData mt = copy_task(63, 200 + seed);  // 50 training pairs
    ASSERT_EQ(mt.train_pairs.size(), 50u);
    const EmbeddingTable emb = table_for(c, {&task, &mt});
    plain_sum += run_experiment(c, task, {}, {}, emb).result.history[0].train_loss;
    c.regime = Regime::InitPretrain;
    c.pretrain = {mt.spec};
    c.pretrain_epochs = 10;
    pre_sum += run_experiment(c, task, {}, {&mt}, emb).result.history[0].train_loss;
  }
  EXPECT_LT(pre_sum / 5, plain_sum / 5);
}

// ---- checkpoints ----

class CheckpointTest : public ::testing::Test {
 protected:
  TrainConfig config = small_config();
  TaskData task = synthetic_task(40, 21);
  EmbeddingTable emb = table_for(config, {&task});
  fs::path dir = temp_dir("ckpt");
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  const auto r = run_experiment(config, task, {}, {}, emb).result;
  const std::string path = (dir / "a.sprl").string();
  save_checkpoint(r.best, path);
  const Checkpoint c = load_checkpoint(path);
  EXPECT_EQ(c.tensors, r.best.tensors);
  EXPECT_EQ(c.epoch, r.best.epoch);
  EXPECT_EQ(c.dev_metric, r.best.dev_metric);
  EXPECT_EQ(config_fingerprint(c.config), config_fingerprint(r.best.config));
  EXPECT_EQ(c.target_catalog().names(), task.catalog.names());
  save_checkpoint(c, (dir / "b.sprl").string());
  std::ifstream fa(path, std::ios::binary), fb(dir / "b.sprl", std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(CheckpointTest, TruncatedFileIsLoadError) {
  config.epochs = 0;
  const auto r = run_experiment(config, task, {}, {}, emb).result;
  const std::string path = (dir / "t.sprl").string();
  save_checkpoint(r.best, path);
  const auto size = fs::file_size(path);
  for (auto keep : {size - 1, size / 2, std::uintmax_t{10}, std::uintmax_t{0}}) {
    fs::resize_file(path, keep);
    EXPECT_THROW(load_checkpoint(path), LoadError) << keep;
    save_checkpoint(r.best, path);
  }
}

TEST_F(CheckpointTest, BadMagicIsLoadError) {
  const std::string path = (dir / "bad.sprl").string();
  std::ofstream(path) << "NOTACKPT 1\n";
  EXPECT_THROW(load_checkpoint(path), LoadError);
  EXPECT_THROW(load_checkpoint((dir / "missing.sprl").string()), LoadError);
}

TEST_F(CheckpointTest, LoadThenEvaluateMatches) {
  const auto r = run_experiment(config, task, {}, {}, emb).result;
  const std::string path = (dir / "e.sprl").string();
  save_checkpoint(r.best, path);
  const auto before = restore_model(r.best);
  const auto after = restore_model(load_checkpoint(path));
  const auto a = evaluate_spr(*before, emb, "syn", LabelMode::Binary, task.test, "test", 1);
  const auto b = evaluate_spr(*after, emb, "syn", LabelMode::Binary, task.test, "test", 1);
  EXPECT_EQ(report_rows(a), report_rows(b));
  EXPECT_EQ(spr_scores(*before, emb, "syn", task.test), spr_scores(*after, emb, "syn", task.test));
}

// ---- ablation ----

TEST(Ablation, TaskWeightsPerMode) {
  const TaskData full = synthetic_task(50, 31);
  const FractionSample s = sample_fraction(full.train.size(), 0.25, 4);
  const std::size_t target = full.catalog.index_of("volition");

  const TaskData only = ablation_task(full, "volition", s, AblationMode::TargetOnly, 0.1);
  ASSERT_EQ(only.train.size(), s.indices.size());
  for (std::size_t i = 0; i < only.train.size(); ++i) {
    EXPECT_EQ(only.train[i].instance_id(), full.train[s.indices[i]].instance_id());
    for (std::size_t j = 0; j < full.catalog.size(); ++j)
      EXPECT_EQ(only.property_weights[i][j], j == target ? 1.0 : 0.0);
  }

  const TaskData co = ablation_task(full, "volition", s, AblationMode::CoTrain, 0.1);
  ASSERT_EQ(co.train.size(), full.train.size());
  const std::set<std::size_t> sampled(s.indices.begin(), s.indices.end());
  for (std::size_t i = 0; i < co.train.size(); ++i)
    for (std::size_t j = 0; j < full.catalog.size(); ++j)
      EXPECT_EQ(co.property_weights[i][j], j == target ? (sampled.count(i) ? 1.0 : 0.0) : 0.1);
}

TEST(Ablation, FullFractionUsesEveryTargetLabel) {
  const TaskData full = synthetic_task(50, 32);
  const FractionSample s = sample_fraction(full.train.size(), 1.0, 4);
  const std::size_t target = full.catalog.index_of("animate");
  for (auto mode : {AblationMode::TargetOnly, AblationMode::CoTrain}) {
    const TaskData t = ablation_task(full, "animate", s, mode, 0.1);
    ASSERT_EQ(t.train.size(), full.train.size());
    for (const auto& w : t.property_weights) EXPECT_EQ(w[target], 1.0);
  }
}

TEST(Ablation, RowPerCell) {
  TrainConfig base = small_config();
  base.epochs = 1;
  const TaskData full = synthetic_task(60, 33);
  const EmbeddingTable emb = table_for(base, {&full});
  AblationConfig ac;
  ac.base = base;
  ac.property = "negated";
  ac.fractions = {0.25, 1.0};
  ac.seeds = {1, 2};
  const auto rows = ablation_run(ac, full, emb);
  ASSERT_EQ(rows.size(), 2u * 2u * 2u);
  std::set<std::tuple<double, std::string, std::uint64_t>> cells;
  for (const auto& r : rows) {
    EXPECT_EQ(r.property, "negated");
    EXPECT_EQ(r.split, "test");
    EXPECT_GE(r.value, 0.0);
    EXPECT_LE(r.value, 1.0);
    cells.insert({*r.fraction, r.mode, *r.seed});
  }
  EXPECT_EQ(cells.size(), rows.size());
  EXPECT_EQ(ablation_run(ac, full, emb), rows);
}

TEST(Ablation, NoPositivesIsFlaggedNotFatal) {
  TrainConfig base = small_config();
  base.epochs = 1;
  TaskData full = synthetic_task(40, 34);
  for (auto& in : full.train) in.labels.insert_or_assign("instrument", false);
  const EmbeddingTable emb = table_for(base, {&full});
  AblationConfig ac;
  ac.base = base;
  ac.property = "instrument";
  ac.fractions = {0.1};
  ac.modes = {AblationMode::TargetOnly};
  const auto rows = ablation_run(ac, full, emb);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].metric, "f1[no-positives]");
}

TEST(Ablation, UnknownPropertyIsConfigError) {
  TrainConfig base = small_config();
  const TaskData full = synthetic_task(20, 35);
  const EmbeddingTable emb = table_for(base, {&full});
  AblationConfig ac;
  ac.base = base;
  ac.property = "sentient";
  EXPECT_THROW(ablation_run(ac, full, emb), ConfigError);
  EXPECT_THROW(parse_ablation_mode("both"), ConfigError);
}

// ---- CSV ----

TEST(Csv, MetricRoundTrip) {
  const std::vector<MetricRow> rows{
      {"volition", 0.05, "co-train", 3, 7, "test", "f1", 0.1 + 0.2},
      {"ALL", std::nullopt, "", std::nullopt, 0, "dev", "micro_f1", 1.0 / 3.0},
      {"awareness", std::nullopt, "scalar", 1, 2, "dev", "pearson[undefined]", 0.0},
  };
  std::stringstream ss;
  write_metric_csv(ss, rows);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), kMetricHeader);
  EXPECT_EQ(read_metric_csv(ss), rows);
}

TEST(Csv, PredictionRoundTrip) {
  const std::vector<PredictionRow> rows{{"s1:1:3", "volition", -0.25, 0.4378, false, 1.0},
                                        {"s2:0:2", "volition", 2.5, std::nullopt, true, 4.5}};
  std::stringstream ss;
  write_predictions_csv(ss, rows);
  EXPECT_EQ(read_predictions_csv(ss), rows);
}

TEST(Csv, MalformedInputIsParseError) {
  std::stringstream no_header("a,b\n");
  EXPECT_THROW(read_metric_csv(no_header), ParseError);
  std::stringstream short_row(std::string(kMetricHeader) + "\nALL,,x\n");
  try {
    read_metric_csv(short_row);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::stringstream bad_value(std::string(kMetricHeader) + "\nALL,,,,1,dev,f1,abc\n");
  EXPECT_THROW(read_metric_csv(bad_value), ParseError);
  std::vector<MetricRow> comma{{"a,b", std::nullopt, "", std::nullopt, 0, "dev", "f1", 0}};
  std::stringstream out;
  EXPECT_THROW(write_metric_csv(out, comma), ContractError);
}

TEST(Csv, ReportRowsLayout) {
  const auto report = binary_report({{"a", {2, 1, 0, 3}}, {"b", {1, 0, 1, 4}}}, "dev", 3);
  const auto rows = report_rows(report, 5, "binary");
  ASSERT_EQ(rows.size(), 3u * 2u + 2u);
  EXPECT_EQ(rows.back().property, "ALL");
  EXPECT_EQ(rows.back().metric, "macro_f1");
  for (const auto& r : rows) {
    EXPECT_EQ(r.epoch, 3);
    EXPECT_EQ(*r.seed, 5u);
  }
}

// ---- synthetic data ----

TEST(Synthetic, LabelsFollowTokenPatterns) {
  using namespace detail;
  const auto d = synthetic_dataset(2000, 77);
  for (const auto* split : {&d.train, &d.dev, &d.test}) {
    for (const auto& in : *split) {
      const auto& tok = in.tokens;
      const std::string& arg = tok.at(in.arg_head);
      const std::string& pred = tok.at(in.pred_head);
      const bool animate = contains_word(kAnimate, arg);
      ASSERT_TRUE(animate || contains_word(kInanimate, arg)) << arg;
      const bool action = contains_word(kActionVerbs, pred);
      ASSERT_TRUE(action || contains_word(kStateVerbs, pred)) << pred;
      std::size_t np_start = in.arg_head;
      if (np_start > 0 && contains_word(kModifiers, tok[np_start - 1])) --np_start;
      const bool with = np_start > 0 && tok[np_start - 1] == "with";
      EXPECT_EQ(binary_label(in.labels.at("animate")), animate);
      EXPECT_EQ(binary_label(in.labels.at("action_pred")), action);
      EXPECT_EQ(binary_label(in.labels.at("volition")), animate && action);
      EXPECT_EQ(binary_label(in.labels.at("precedes")), in.arg_head < in.pred_head);
      EXPECT_EQ(binary_label(in.labels.at("negated")), in.pred_head > 0 && tok[in.pred_head - 1] == "not");
      EXPECT_EQ(binary_label(in.labels.at("instrument")), with);
    }
  }
}

TEST(Synthetic, SplitSizesAndDeterminism) {
  const auto a = synthetic_dataset(5000, 2024);
  EXPECT_EQ(a.train.size(), 4000u);
  EXPECT_EQ(a.dev.size(), 500u);
  EXPECT_EQ(a.test.size(), 500u);
  const auto b = synthetic_dataset(5000, 2024);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].tokens, b.train[i].tokens);
    EXPECT_EQ(a.train[i].labels, b.train[i].labels);
  }
  const auto names = synthetic_properties();
  EXPECT_EQ(names.size(), 6u);
  for (const auto& in : a.test) EXPECT_EQ(in.labels.size(), 6u);
}

TEST(Synthetic, EveryPropertyHasBothValues) {
  const auto d = synthetic_dataset(1000, 5);
  for (const auto& p : synthetic_properties()) {
    std::size_t pos = 0;
    for (const auto& in : d.train) pos += binary_label(in.labels.at(p));
    EXPECT_GT(pos, 20u) << p;
    EXPECT_LT(pos, d.train.size() - 20) << p;
  }
}

TEST(Synthetic, VocabularyCoversTokens) {
  const auto vocab = synthetic_vocabulary();
  for (const auto& in : synthetic_dataset(500, 3).train)
    for (const auto& t : in.tokens) EXPECT_TRUE(vocab.count(t)) << t;
}

// ---- prep ----

class PrepTest : public ::testing::Test {
 protected:
  fs::path dir = temp_dir("prep");

  std::string file(const std::string& name, const std::string& contents) {
    const fs::path p = dir / name;
    std::ofstream(p, std::ios::binary) << contents;
    return p.string();
  }
};

TEST_F(PrepTest, BinaryUsesFourFiveRule) {
  const auto path = file("b.jsonl",
                         R"({"sentence_id":"s1","tokens":["a","b","c"],"pred_head":1,"arg_head":0,"labels":{"x":4,"y":3,"z":"NA"}})"
                         "\n");
  const auto v = prepare_file(path, {LabelMode::Binary});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].labels.at("x"), LabelValue{true});
  EXPECT_EQ(v[0].labels.at("y"), LabelValue{false});
  EXPECT_EQ(v[0].labels.at("z"), LabelValue{false});
}

TEST_F(PrepTest, ScalarAveragesTwoAnnotators) {
  const auto path = file("s.jsonl",
                         R"({"sentence_id":"s1","tokens":["a","b"],"pred_head":1,"arg_head":0,"labels":{"x":[4,5],"y":["NA",5],"z":2}})"
                         "\n");
  const auto v = prepare_file(path, {LabelMode::Scalar});
  EXPECT_EQ(v[0].labels.at("x"), LabelValue{4.5});
  EXPECT_EQ(v[0].labels.at("y"), LabelValue{3.0});
  EXPECT_EQ(v[0].labels.at("z"), LabelValue{2.0});
}

TEST_F(PrepTest, SchemaErrorsCarryLineNumber) {
  const std::string good = R"({"sentence_id":"s1","tokens":["a","b"],"pred_head":1,"arg_head":0,"labels":{"x":4}})";
  const auto path = file("bad.jsonl", good + "\n" + good + "\n" +
                                          R"({"sentence_id":"s3","tokens":["a"],"pred_head":0,"arg_head":0,"labels":{"x":[1,2,3]}})" +
                                          "\n");
  try {
    prepare_file(path, {LabelMode::Scalar});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  const auto broken = file("broken.jsonl", good + "\n{not json\n");
  try {
    prepare_file(broken, {});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST_F(PrepTest, EmptyFileIsDataError) {
  EXPECT_THROW(prepare_file(file("empty.jsonl", ""), {}), DataError);
  EXPECT_THROW(prepare_file((dir / "absent.jsonl").string(), {}), DataError);
}

TEST_F(PrepTest, SenseSelectionsNeedMap) {
  const auto path = file("ss.jsonl",
                         R"({"sentence_id":"s1","tokens":["dog","ran"],"pred_head":1,"arg_head":0,"labels":{"x":4},"sense_selections":[["dog.n.01"],["dog.n.01"]]})"
                         "\n");
  EXPECT_THROW(prepare_file(path, {}), ConfigError);
  const SenseMap map = load_sense_map(file("senses.tsv", "dog.n.01\tnoun.animal\n"));
  PrepOptions opt;
  opt.senses = &map;
  const auto v = prepare_file(path, opt);
  ASSERT_TRUE(v[0].supersense.has_value());
  const auto s = summarize_labels(v);
  ASSERT_TRUE(s.mean_supersense_perplexity.has_value());
  EXPECT_NEAR(*s.mean_supersense_perplexity, 1.0, 1e-12);
}

TEST_F(PrepTest, BadSenseMapLine) {
  EXPECT_THROW(load_sense_map(file("bad.tsv", "dog.n.01 noun.animal\n")), ParseError);
  EXPECT_THROW(load_sense_map(file("bad2.tsv", "dog.n.01\tnoun.dragon\n")), ParseError);
}

TEST_F(PrepTest, SummaryCounts) {
  const auto d = synthetic_dataset(100, 1);
  const auto s = summarize_labels(d.train);
  EXPECT_EQ(s.instances, d.train.size());
  for (const auto& p : synthetic_properties()) {
    std::size_t pos = 0;
    for (const auto& in : d.train) pos += binary_label(in.labels.at(p));
    EXPECT_EQ(s.properties.at(p).positive, pos);
    EXPECT_EQ(s.properties.at(p).count, d.train.size());
  }
  EXPECT_FALSE(s.mean_supersense_perplexity.has_value());
}

// ---- config ----

TEST(Config, UnknownKeyIsConfigError) {
  const fs::path dir = temp_dir("config");
  std::ofstream(dir / "c.json") << R"({"target": {"name": "spr1", "train": "t.jsonl"}, "epochz": 3})";
  EXPECT_THROW(load_config((dir / "c.json").string()), ConfigError);
}

TEST(Config, JsonRoundTripKeepsFingerprint) {
  TrainConfig c = small_config(9);
  c.regime = Regime::Combined;
  TaskSpec aux;
  aux.name = "spr2";
  aux.role = TaskRole::Auxiliary;
  aux.lambda = 0.01;
  c.auxiliary = {aux};
  TaskSpec mt;
  mt.name = "mt";
  mt.kind = TaskKind::Mt;
  mt.role = TaskRole::Auxiliary;
  c.pretrain = {mt};
  c.validate();
  const TrainConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(config_fingerprint(back), config_fingerprint(c));
  EXPECT_EQ(condition_name(c), "mt:syn+spr2");
}

TEST(Config, ValidationRules) {
  TrainConfig c = small_config();
  c.target.lambda = 0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  TaskSpec aux;
  aux.name = "aux";
  c.auxiliary = {aux};
  EXPECT_THROW(c.validate(), ConfigError);  // single takes no auxiliaries
  c.regime = Regime::Concurrent;
  EXPECT_NO_THROW(c.validate());
  c.regime = Regime::InitPretrain;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.epochs = -1;
  EXPECT_THROW(c.validate(), ConfigError);
}
