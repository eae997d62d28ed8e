#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sprl/core/errors.hpp"
#include "sprl/core/random.hpp"
#include "sprl/data/embeddings.hpp"
#include "sprl/data/instance.hpp"
#include "sprl/model/decoders.hpp"

namespace sprl {

enum class TaskKind { Spr, PropBank, Supersense, Mt };
enum class TaskRole { Target, Auxiliary };
enum class Regime { Single, InitPretrain, Concurrent, Combined };

inline TaskKind parse_task_kind(const std::string& s) {
  if (s == "spr") return TaskKind::Spr;
  if (s == "propbank") return TaskKind::PropBank;
  if (s == "supersense") return TaskKind::Supersense;
  if (s == "mt") return TaskKind::Mt;
  throw ConfigError("task kind must be spr, propbank, supersense or mt, got '" + s + "'");
}

inline std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Spr: return "spr";
    case TaskKind::PropBank: return "propbank";
    case TaskKind::Supersense: return "supersense";
    case TaskKind::Mt: return "mt";
  }
  return "?";
}

inline Regime parse_regime(const std::string& s) {
  if (s == "single") return Regime::Single;
  if (s == "init-pretrain") return Regime::InitPretrain;
  if (s == "concurrent") return Regime::Concurrent;
  if (s == "combined") return Regime::Combined;
  throw ConfigError("regime must be single, init-pretrain, concurrent or combined, got '" + s + "'");
}

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::Single: return "single";
    case Regime::InitPretrain: return "init-pretrain";
    case Regime::Concurrent: return "concurrent";
    case Regime::Combined: return "combined";
  }
  return "?";
}

inline constexpr double kLambdaGrid[] = {1.0, 1e-1, 1e-2, 1e-3, 1e-4};

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::Spr;
  TaskRole role = TaskRole::Target;
  LabelMode mode = LabelMode::Binary;  // SPR tasks only
  std::string train;
  std::string dev;
  std::string test;
  std::optional<double> alpha;  // unset: |target| / |this task|
  double lambda = 1.0;
  std::vector<std::string> properties;  // SPR catalog; empty: taken from the training data
};

struct ModelConfig {
  std::size_t hidden_dim = 600;
  std::size_t shared_dim = 300;
  Activation activation = Activation::Relu;
  std::size_t mt_layers = 2;
  std::size_t mt_embed_dim = 256;
  std::size_t mt_vocab_size = 10000;
};

struct TrainConfig {
  Regime regime = Regime::Single;
  std::uint64_t seed = 1;
  int epochs = 10;
  int pretrain_epochs = 10;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  std::string embeddings;  // empty: every token gets a random vector
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  ModelConfig model;
  TaskSpec target;
  std::vector<TaskSpec> auxiliary;  // trained concurrently with the target
  std::vector<TaskSpec> pretrain;   // trained one after another before the target stage

  void validate() const;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type: " + j.at(key).dump());
  }
}

}  // namespace detail

inline TaskSpec task_from_json(const nlohmann::json& j, TaskRole role) {
  detail::reject_unknown(j, {"name", "kind", "mode", "train", "dev", "test", "alpha", "lambda", "properties"}, "task");
  TaskSpec t;
  t.role = role;
  t.name = detail::get_or<std::string>(j, "name", "");
  if (t.name.empty()) throw ConfigError("every task needs a name");
  t.kind = parse_task_kind(detail::get_or<std::string>(j, "kind", "spr"));
  t.mode = parse_label_mode(detail::get_or<std::string>(j, "mode", "binary"));
  t.train = detail::get_or<std::string>(j, "train", "");
  t.dev = detail::get_or<std::string>(j, "dev", "");
  t.test = detail::get_or<std::string>(j, "test", "");
  if (j.contains("alpha") && !(j["alpha"].is_string() && j["alpha"] == "auto")) {
    t.alpha = detail::get_or<double>(j, "alpha", 1.0);
  }
  t.lambda = detail::get_or<double>(j, "lambda", 1.0);
  t.properties = detail::get_or<std::vector<std::string>>(j, "properties", {});
  return t;
}

inline nlohmann::json task_to_json(const TaskSpec& t) {
  nlohmann::json j{{"name", t.name}, {"kind", to_string(t.kind)}, {"mode", to_string(t.mode)},
                   {"train", t.train}, {"dev", t.dev},          {"test", t.test},
                   {"lambda", t.lambda}, {"properties", t.properties}};
  if (t.alpha) j["alpha"] = *t.alpha;
  else j["alpha"] = "auto";
  return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"regime", "seed", "epochs", "pretrain_epochs", "learning_rate", "clip_norm", "embeddings",
                             "embedding_dim", "model", "target", "auxiliary", "pretrain"},
                         "config");
  TrainConfig c;
  c.regime = parse_regime(detail::get_or<std::string>(j, "regime", "single"));
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
  c.epochs = detail::get_or<int>(j, "epochs", 10);
  c.pretrain_epochs = detail::get_or<int>(j, "pretrain_epochs", 10);
  c.learning_rate = detail::get_or<double>(j, "learning_rate", 1e-3);
  c.clip_norm = detail::get_or<double>(j, "clip_norm", 5.0);
  c.embeddings = detail::get_or<std::string>(j, "embeddings", "");
  c.embedding_dim = detail::get_or<std::size_t>(j, "embedding_dim", kDefaultEmbeddingDim);
  if (j.contains("model")) {
    const auto& m = j["model"];
    detail::reject_unknown(m, {"hidden_dim", "shared_dim", "activation", "mt_layers", "mt_embed_dim", "mt_vocab_size"},
                           "model");
    c.model.hidden_dim = detail::get_or<std::size_t>(m, "hidden_dim", c.model.hidden_dim);
    c.model.shared_dim = detail::get_or<std::size_t>(m, "shared_dim", c.model.shared_dim);
    c.model.activation = parse_activation(detail::get_or<std::string>(m, "activation", "relu"));
    c.model.mt_layers = detail::get_or<std::size_t>(m, "mt_layers", c.model.mt_layers);
    c.model.mt_embed_dim = detail::get_or<std::size_t>(m, "mt_embed_dim", c.model.mt_embed_dim);
    c.model.mt_vocab_size = detail::get_or<std::size_t>(m, "mt_vocab_size", c.model.mt_vocab_size);
  }
  if (!j.contains("target")) throw ConfigError("config needs a target task");
  c.target = task_from_json(j["target"], TaskRole::Target);
  for (const char* key : {"auxiliary", "pretrain"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_array()) throw ConfigError(std::string("'") + key + "' must be a list of tasks");
    for (const auto& t : j[key]) {
      (std::string(key) == "auxiliary" ? c.auxiliary : c.pretrain).push_back(task_from_json(t, TaskRole::Auxiliary));
    }
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const TrainConfig& c) {
  nlohmann::json model{{"hidden_dim", c.model.hidden_dim},   {"shared_dim", c.model.shared_dim},
                       {"activation", to_string(c.model.activation)}, {"mt_layers", c.model.mt_layers},
                       {"mt_embed_dim", c.model.mt_embed_dim}, {"mt_vocab_size", c.model.mt_vocab_size}};
  nlohmann::json aux = nlohmann::json::array(), pre = nlohmann::json::array();
  for (const auto& t : c.auxiliary) aux.push_back(task_to_json(t));
  for (const auto& t : c.pretrain) pre.push_back(task_to_json(t));
  return {{"regime", to_string(c.regime)},
          {"seed", c.seed},
          {"epochs", c.epochs},
          {"pretrain_epochs", c.pretrain_epochs},
          {"learning_rate", c.learning_rate},
          {"clip_norm", c.clip_norm},
          {"embeddings", c.embeddings},
          {"embedding_dim", c.embedding_dim},
          {"model", model},
          {"target", task_to_json(c.target)},
          {"auxiliary", aux},
          {"pretrain", pre}};
}

inline TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void TrainConfig::validate() const {
  if (epochs < 0 || pretrain_epochs < 0) throw ConfigError("epoch counts must be non-negative");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (!(clip_norm > 0)) throw ConfigError("clip_norm must be positive");
  if (embedding_dim == 0 || model.hidden_dim == 0 || model.shared_dim == 0 || model.mt_layers == 0 ||
      model.mt_embed_dim == 0)
    throw ConfigError("model dimensions must be positive");
  if (target.kind != TaskKind::Spr) throw ConfigError("the target task must be an SPR task");
  if (target.alpha && *target.alpha != 1.0) throw ConfigError("the target task has alpha = 1");
  if (target.lambda != 1.0) throw ConfigError("the target task has lambda = 1");
  const bool wants_pretrain = regime == Regime::InitPretrain || regime == Regime::Combined;
  const bool allows_aux = regime == Regime::Concurrent || regime == Regime::Combined;
  if (wants_pretrain && pretrain.empty()) throw ConfigError(to_string(regime) + " needs at least one pretrain task");
  if (!wants_pretrain && !pretrain.empty()) throw ConfigError(to_string(regime) + " takes no pretrain tasks");
  if (!allows_aux && !auxiliary.empty()) throw ConfigError(to_string(regime) + " takes no auxiliary tasks");
  std::vector<std::string> names{target.name};
  for (const auto* list : {&auxiliary, &pretrain}) {
    for (const auto& t : *list) {
      if (t.alpha && !(*t.alpha > 0)) throw ConfigError("alpha of task '" + t.name + "' must be positive");
      if (!(t.lambda >= 0)) throw ConfigError("lambda of task '" + t.name + "' must be non-negative");
      if (std::find(names.begin(), names.end(), t.name) != names.end())
        throw ConfigError("duplicate task name '" + t.name + "'");
      names.push_back(t.name);
    }
  }
}

/// Short experiment label in the style "mt:spr1+2": pretraining stages,
/// then the target and concurrent auxiliaries.
inline std::string condition_name(const TrainConfig& c) {
  std::string out;
  for (const auto& t : c.pretrain) out += t.name + ":";
  out += c.target.name;
  for (const auto& t : c.auxiliary) out += "+" + t.name;
  return out;
}

/// Hex FNV-1a of the canonical config text.
inline std::string config_fingerprint(const TrainConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(c).dump())));
  return buf;
}

}  // namespace sprl
