#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sprl/sprl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sprl;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(ss.str())));
  return buf;
}

json dataset_entries(const std::vector<std::string>& paths) {
  json out = json::array();
  for (const auto& p : paths)
    out.push_back({{"path", p}, {"fnv1a64", file_hash(p)}, {"bytes", fs::file_size(p)}});
  return out;
}

json seed_entry(std::uint64_t master) {
  const SeedBundle b = SeedBundle::from_master(master);
  return {{"master", master}, {"init", b.init}, {"oov", b.oov}, {"schedule", b.schedule}, {"subsample", b.subsample}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

/// Config paths made absolute against the config file's directory, so the
/// manifest and checkpoint alone locate every input.
TrainConfig resolve_paths(TrainConfig c, const fs::path& base) {
  auto fix = [&](TaskSpec& s) {
    for (auto* p : {&s.train, &s.dev, &s.test})
      if (!p->empty()) *p = fs::absolute(detail::resolve(*p, base)).lexically_normal().string();
  };
  fix(c.target);
  for (auto& t : c.auxiliary) fix(t);
  for (auto& t : c.pretrain) fix(t);
  if (!c.embeddings.empty()) c.embeddings = fs::absolute(detail::resolve(c.embeddings, base)).lexically_normal().string();
  return c;
}

TrainConfig read_config(const std::string& path) {
  return resolve_paths(load_config(path), fs::absolute(path).parent_path());
}

std::vector<PredictionRow> prediction_rows(const std::vector<std::vector<double>>& scores,
                                           const std::vector<Instance>& instances, const PropertyCatalog& catalog,
                                           LabelMode mode) {
  std::vector<PredictionRow> rows;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (std::size_t j = 0; j < catalog.size(); ++j) {
      const auto& label = instances[i].labels.at(catalog.name(j));
      PredictionRow r;
      r.instance_id = instances[i].instance_id();
      r.property = catalog.name(j);
      r.score = scores[i][j];
      if (mode == LabelMode::Binary) {
        r.probability = 1.0 / (1.0 + std::exp(-r.score));
        r.prediction = r.score > 0.0;
        r.gold = binary_label(label) ? 1.0 : 0.0;
      } else {
        r.prediction = binarize_scalar(r.score);
        r.gold = scalar_label(label);
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

// ---- prep ----

struct PrepArgs {
  std::string train, dev, test, mode = "binary", out_dir, sense_map, frame_map;
};

int cmd_prep(const PrepArgs& a) {
  if (a.train.empty() && a.dev.empty() && a.test.empty()) throw ConfigError("prep needs --train, --dev or --test");
  SenseMap senses;
  FrameMap frames;
  PrepOptions opt;
  opt.mode = parse_label_mode(a.mode);
  if (!a.sense_map.empty()) {
    senses = load_sense_map(a.sense_map);
    opt.senses = &senses;
  }
  if (!a.frame_map.empty()) {
    frames = FrameMap::load(a.frame_map);
    opt.frames = &frames;
  }
  std::vector<std::pair<std::string, std::vector<Instance>>> splits;
  for (const auto& [name, path] : {std::pair{"train", a.train}, {"dev", a.dev}, {"test", a.test}})
    if (!path.empty()) splits.emplace_back(name, prepare_file(path, opt));
  const fs::path out = prepare_out_dir(a.out_dir);
  for (const auto& [name, instances] : splits) {
    write_instances((out / (name + ".jsonl")).string(), instances);
    const LabelSummary s = summarize_labels(instances);
    std::cout << name << ": " << s.instances << " instances (" << a.mode << ")\n";
    for (const auto& [prop, p] : s.properties) {
      std::cout << "  " << prop << ": " << p.positive << "/" << p.count << " positive";
      if (opt.mode == LabelMode::Scalar) std::cout << ", mean " << format_double(p.mean);
      std::cout << '\n';
    }
    if (s.mean_supersense_perplexity)
      std::cout << "  mean supersense perplexity: " << format_double(*s.mean_supersense_perplexity) << '\n';
  }
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string config, out_dir, regime, mode;
  std::optional<std::uint64_t> seed;
  std::vector<double> lambdas;
};

std::vector<MetricRow> history_rows(const TrainResult& r, std::uint64_t seed, const std::string& mode) {
  std::vector<MetricRow> rows;
  for (const auto& e : r.history) {
    rows.push_back({"ALL", std::nullopt, mode, seed, e.epoch, "train", "loss", e.train_loss});
    for (auto& row : report_rows(e.dev, seed, mode)) rows.push_back(std::move(row));
  }
  return rows;
}

/// Trains one config into `out`: manifest first, then checkpoint, history
/// and the best checkpoint's dev/test metrics.
MetricsReport train_one(const TrainConfig& config, const fs::path& out, const std::vector<std::string>& argv) {
  LoadedExperiment e = load_experiment(config, {});
  json manifest{{"tool", "sprl"},
                {"version", kVersion},
                {"command", argv},
                {"condition", condition_name(config)},
                {"config", config_to_json(config)},
                {"config_fingerprint", config_fingerprint(config)},
                {"seed", seed_entry(config.seed)},
                {"datasets", dataset_entries(e.data_files())},
                {"alpha", json::object()},
                {"started_at", utc_now()}};
  for (const auto* t : e.auxiliary_ptrs()) {
    const double alpha = t->spec.alpha ? *t->spec.alpha : mixing_weight(e.target.train_size(), t->train_size());
    manifest["alpha"][t->spec.name] = {{"alpha", alpha}, {"target_size", e.target.train_size()},
                                       {"aux_size", t->train_size()}, {"lambda", t->spec.lambda}};
  }
  write_json(out / "manifest.json", manifest);

  const ExperimentResult r = run_loaded(e);
  const std::string mode = to_string(config.target.mode);
  save_checkpoint(r.result.best, (out / "checkpoint.sprl").string());
  write_metric_csv((out / "history.csv").string(), history_rows(r.result, config.seed, mode));

  const auto model = restore_model(r.result.best);
  const int epoch = r.result.best.epoch;
  const MetricsReport dev =
      evaluate_spr(*model, e.embeddings, e.target.spec.name, config.target.mode, e.target.dev, "dev", epoch);
  std::vector<MetricRow> rows = report_rows(dev, config.seed, mode);
  if (!e.target.test.empty()) {
    const MetricsReport test =
        evaluate_spr(*model, e.embeddings, e.target.spec.name, config.target.mode, e.target.test, "test", epoch);
    for (auto& row : report_rows(test, config.seed, mode)) rows.push_back(std::move(row));
  }
  write_metric_csv((out / "metrics.csv").string(), rows);
  std::cout << condition_name(config) << ": best epoch " << epoch << ", dev " << format_double(dev.selection_value())
            << '\n';
  return dev;
}

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
  TrainConfig config = read_config(a.config);
  if (a.seed) config.seed = *a.seed;
  if (!a.regime.empty()) config.regime = parse_regime(a.regime);
  if (!a.mode.empty()) config.target.mode = parse_label_mode(a.mode);
  const fs::path out = prepare_out_dir(a.out_dir);
  if (a.lambdas.size() <= 1) {
    if (a.lambdas.size() == 1)
      for (auto& t : config.auxiliary) t.lambda = a.lambdas[0];
    config.validate();
    train_one(config, out, argv);
    return 0;
  }
  if (config.auxiliary.empty()) throw ConfigError("a lambda grid needs auxiliary tasks");
  std::vector<MetricRow> grid;
  for (const double lambda : a.lambdas) {
    TrainConfig c = config;
    for (auto& t : c.auxiliary) t.lambda = lambda;
    c.validate();
    const std::string tag = "lambda=" + format_double(lambda);
    const fs::path dir = prepare_out_dir((out / tag).string());
    const MetricsReport dev = train_one(c, dir, argv);
    grid.push_back({"ALL", std::nullopt, tag, c.seed, dev.epoch, "dev",
                    dev.scalar ? "macro_pearson" : "micro_f1", dev.selection_value()});
  }
  write_metric_csv((out / "lambda_grid.csv").string(), grid);
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string checkpoint, data, mode, embeddings, out_dir;
};

int cmd_eval(const EvalArgs& a) {
  const Checkpoint c = load_checkpoint(a.checkpoint);
  const LabelMode mode = a.mode.empty() ? c.config.target.mode : parse_label_mode(a.mode);
  const std::vector<Instance> data = read_instances(a.data);
  if (data.empty()) throw DataError(a.data + ": no instances to evaluate");
  const PropertyCatalog& catalog = c.target_catalog();
  for (const auto& in : data) {
    for (const auto& p : catalog.names())
      if (!in.labels.count(p))
        throw ContractError("instance " + in.instance_id() + " has no label for checkpoint property '" + p + "'");
    for (const auto& [p, _] : in.labels)
      if (!catalog.contains(p))
        throw ContractError("instance " + in.instance_id() + " has property '" + p + "' unknown to the checkpoint");
  }
  const std::string emb_path = a.embeddings.empty() ? c.config.embeddings : a.embeddings;
  std::set<std::string> vocab;
  for (const auto& in : data) vocab.insert(in.tokens.begin(), in.tokens.end());
  const EmbeddingTable emb =
      load_embeddings(emb_path, vocab, SeedBundle::from_master(c.config.seed).oov, c.config.embedding_dim);
  const auto model = restore_model(c);
  const std::string head = c.config.target.name;
  const auto scores = spr_scores(*model, emb, head, data);
  const MetricsReport report = spr_report(scores, data, catalog, mode, "eval", c.epoch);
  const fs::path out = prepare_out_dir(a.out_dir);
  write_metric_csv((out / "metrics.csv").string(), report_rows(report, c.config.seed, to_string(mode)));
  write_predictions_csv((out / "predictions.csv").string(), prediction_rows(scores, data, catalog, mode));
  std::cout << (report.scalar ? "macro pearson " : "micro f1 ") << format_double(report.selection_value()) << '\n';
  return 0;
}

// ---- ablate ----

struct AblateArgs {
  std::string config, property, out_dir;
  std::vector<double> fractions{kStandardFractions.begin(), kStandardFractions.end()};
  std::vector<std::string> modes{"target-only", "co-train"};
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> seed;
  double lambda = 0.1;
};

int cmd_ablate(const AblateArgs& a, const std::vector<std::string>& argv) {
  AblationConfig ac;
  ac.base = read_config(a.config);
  ac.property = a.property;
  ac.fractions = a.fractions;
  ac.modes.clear();
  for (const auto& m : a.modes) ac.modes.push_back(parse_ablation_mode(m));
  ac.seeds = a.seeds.empty() ? std::vector<std::uint64_t>{a.seed ? *a.seed : ac.base.seed} : a.seeds;
  ac.cotrain_lambda = a.lambda;
  const TaskData full = load_task(ac.base.target);
  const EmbeddingTable emb = build_embeddings(ac.base, {&full}, ac.base.embeddings);
  const fs::path out = prepare_out_dir(a.out_dir);
  json seeds = json::array();
  for (auto s : ac.seeds) seeds.push_back(seed_entry(s));
  std::vector<std::string> files;
  for (const auto* p : {&ac.base.target.train, &ac.base.target.dev, &ac.base.target.test})
    if (!p->empty()) files.push_back(*p);
  if (!ac.base.embeddings.empty()) files.push_back(ac.base.embeddings);
  write_json(out / "manifest.json", {{"tool", "sprl"},
                                     {"version", kVersion},
                                     {"command", argv},
                                     {"config", config_to_json(ac.base)},
                                     {"property", ac.property},
                                     {"fractions", ac.fractions},
                                     {"modes", a.modes},
                                     {"cotrain_lambda", ac.cotrain_lambda},
                                     {"seeds", seeds},
                                     {"datasets", dataset_entries(files)},
                                     {"started_at", utc_now()}});
  const auto rows = ablation_run(ac, full, emb);
  write_metric_csv((out / "ablation.csv").string(), rows);
  for (const auto& r : rows)
    std::cout << r.mode << " " << format_double(*r.fraction) << " seed " << *r.seed << ": " << r.metric << " "
              << format_double(r.value) << '\n';
  return 0;
}

// ---- compare ----

struct CompareArgs {
  std::string baseline, system, property, out_dir;
  std::vector<std::string> subsets;
  std::size_t n_true = 40, n_false = 40;
  std::uint64_t seed = 1;
};

struct PropertyView {
  Decisions predicted, gold;
};

PropertyView property_view(const std::vector<PredictionRow>& rows, const std::string& property,
                           const std::string& path) {
  PropertyView v;
  for (const auto& r : rows) {
    if (r.property != property) continue;
    const bool gold = r.probability ? r.gold > 0.5 : binarize_scalar(r.gold);
    if (!v.predicted.emplace(r.instance_id, r.prediction).second)
      throw DataError(path + ": instance " + r.instance_id + " listed twice for '" + property + "'");
    v.gold.emplace(r.instance_id, gold);
  }
  if (v.predicted.empty()) throw DataError(path + ": no predictions for property '" + property + "'");
  return v;
}

std::vector<std::string> read_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  if (ids.empty()) throw DataError(path + ": empty subset");
  return ids;
}

int cmd_compare(const CompareArgs& a) {
  const PropertyView base = property_view(read_predictions_csv(a.baseline), a.property, a.baseline);
  const PropertyView sys = property_view(read_predictions_csv(a.system), a.property, a.system);
  if (base.gold != sys.gold) throw DataError("the two prediction files disagree on instances or gold labels");
  const DisagreementSample sample = disagreement_sample(base.predicted, sys.predicted, base.gold, a.n_true, a.n_false, a.seed);
  const fs::path out = prepare_out_dir(a.out_dir);
  {
    std::ofstream f(out / "sample.csv", std::ios::binary);
    f << "instance_id,gold,baseline,system\n";
    for (const auto& id : sample.ids())
      f << id << ',' << base.gold.at(id) << ',' << base.predicted.at(id) << ',' << sys.predicted.at(id) << '\n';
  }
  std::ofstream f(out / "contingency.csv", std::ios::binary);
  f << "subset,differ,new_true,baseline_true,new_false,baseline_false,delta_false_neg,delta_false_pos\n";
  auto emit = [&](const std::string& name, const std::vector<std::string>& ids) {
    const ContingencyCells c = contingency_cells(base.predicted, sys.predicted, base.gold, ids);
    const ContingencyDelta d = delta_from_cells(c);
    f << name << ',' << d.differ << ',' << c.new_true << ',' << c.baseline_true << ',' << c.new_false << ','
      << c.baseline_false << ',' << d.delta_false_neg << ',' << d.delta_false_pos << '\n';
    std::cout << name << ": differ " << d.differ << ", dFalse- " << d.delta_false_neg << ", dFalse+ "
              << d.delta_false_pos << '\n';
  };
  emit("All", {});
  for (const auto& s : a.subsets) emit(fs::path(s).stem().string(), read_ids(s));
  if (sample.shortfall) std::cout << "fewer disagreements than requested\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Semantic proto-role labeling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  PrepArgs prep;
  auto* p = app.add_subcommand("prep", "convert raw annotations into dataset files");
  p->add_option("--train", prep.train, "raw training records");
  p->add_option("--dev", prep.dev, "raw dev records");
  p->add_option("--test", prep.test, "raw test records");
  p->add_option("--mode", prep.mode, "binary or scalar")->check(CLI::IsMember({"binary", "scalar"}));
  p->add_option("--out-dir", prep.out_dir)->required();
  p->add_option("--sense-map", prep.sense_map, "fine sense to supersense map");
  p->add_option("--frame-map", prep.frame_map, "PropBank frame map");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a model from a config");
  t->add_option("--config", train.config)->required();
  t->add_option("--out-dir", train.out_dir)->required();
  t->add_option("--seed", train.seed);
  t->add_option("--regime", train.regime)->check(CLI::IsMember({"single", "init-pretrain", "concurrent", "combined"}));
  t->add_option("--mode", train.mode)->check(CLI::IsMember({"binary", "scalar"}));
  t->add_option("--lambda", train.lambdas, "auxiliary down-weights; several values run a grid")->delimiter(',');

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  e->add_option("--checkpoint", eval.checkpoint)->required();
  e->add_option("--data", eval.data)->required();
  e->add_option("--mode", eval.mode)->check(CLI::IsMember({"binary", "scalar"}));
  e->add_option("--embeddings", eval.embeddings, "overrides the checkpoint's embedding file");
  e->add_option("--out-dir", eval.out_dir)->required();

  AblateArgs ablate;
  auto* ab = app.add_subcommand("ablate", "training-set fraction curve for one property");
  ab->add_option("--config", ablate.config)->required();
  ab->add_option("--property", ablate.property)->required();
  ab->add_option("--out-dir", ablate.out_dir)->required();
  ab->add_option("--fractions", ablate.fractions)->delimiter(',');
  ab->add_option("--modes", ablate.modes)->delimiter(',')->check(CLI::IsMember({"target-only", "co-train"}));
  ab->add_option("--seeds", ablate.seeds)->delimiter(',');
  ab->add_option("--seed", ablate.seed);
  ab->add_option("--lambda", ablate.lambda, "weight of the other properties in co-train mode");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "disagreement sample and contingency deltas of two systems");
  c->add_option("--baseline", cmp.baseline)->required();
  c->add_option("--system", cmp.system)->required();
  c->add_option("--property", cmp.property)->required();
  c->add_option("--subset", cmp.subsets, "file of instance ids, one per line");
  c->add_option("--n-true", cmp.n_true);
  c->add_option("--n-false", cmp.n_false);
  c->add_option("--seed", cmp.seed);
  c->add_option("--out-dir", cmp.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }
  try {
    if (*p) return cmd_prep(prep);
    if (*t) return cmd_train(train, args);
    if (*e) return cmd_eval(eval);
    if (*ab) return cmd_ablate(ablate, args);
    if (*c) return cmd_compare(cmp);
  } catch (const sprl::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return err.exit_code();
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 1;
}
