#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sprl/model/decoders.hpp"
#include "sprl/model/encoder.hpp"
#include "sprl/model/mt_decoder.hpp"
#include "sprl/train/task.hpp"

namespace sprl {

/// What a decoder head needs besides the model config.
struct HeadSpec {
  std::string name;
  TaskKind kind = TaskKind::Spr;
  PropertyCatalog catalog;  // SPR
  TargetVocab vocab;        // MT
};

inline HeadSpec head_spec(const TaskData& task, std::size_t mt_vocab_size) {
  HeadSpec h;
  h.name = task.spec.name;
  h.kind = task.spec.kind;
  h.catalog = task.catalog;
  if (task.spec.kind == TaskKind::Mt) h.vocab = TargetVocab::build(task.train_pairs, mt_vocab_size);
  return h;
}

using Head = std::variant<SprDecoder, PropBankDecoder, SupersenseDecoder, MtDecoder>;

/// The shared encoder plus one decoder head per task. Parameters are named
/// "encoder.*" and "<task>.*".
class Model {
 public:
  Model(const ModelConfig& config, std::size_t embedding_dim, const std::vector<HeadSpec>& heads)
      : config_(config), encoder_(store_, EncoderConfig{embedding_dim, config.hidden_dim}) {
    const std::size_t d = config.hidden_dim;
    for (const auto& h : heads) {
      if (heads_.count(h.name)) throw ConfigError("duplicate decoder head '" + h.name + "'");
      switch (h.kind) {
        case TaskKind::Spr:
          heads_.emplace(h.name, SprDecoder(store_, h.name, 4 * d, config.shared_dim, h.catalog, config.activation));
          break;
        case TaskKind::PropBank: heads_.emplace(h.name, PropBankDecoder(store_, h.name, 4 * d)); break;
        case TaskKind::Supersense: heads_.emplace(h.name, SupersenseDecoder(store_, h.name, 2 * d)); break;
        case TaskKind::Mt:
          heads_.emplace(h.name, MtDecoder(store_, h.name, h.vocab, d, config.mt_embed_dim, config.mt_layers));
          break;
      }
      specs_.push_back(h);
    }
  }

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  /// The encoder draws from a stream seeded by `seed` alone and each head
  /// from a stream keyed by its name, so adding or removing heads never
  /// changes the initial values of the others.
  void initialize(std::uint64_t seed) {
    Rng enc_rng(seed);
    encoder_.initialize(enc_rng);
    for (auto& [name, head] : heads_) {
      std::uint64_t s = seed ^ fnv1a(name);
      Rng rng(splitmix64(s));
      std::visit([&](auto& h) { h.initialize(rng); }, head);
    }
  }

  const ModelConfig& config() const noexcept { return config_; }
  ParamStore& store() noexcept { return store_; }
  const ParamStore& store() const noexcept { return store_; }
  const Encoder& encoder() const noexcept { return encoder_; }
  const std::vector<HeadSpec>& head_specs() const noexcept { return specs_; }
  bool has_head(const std::string& name) const { return heads_.count(name) != 0; }

  const Head& head(const std::string& name) const {
    auto it = heads_.find(name);
    if (it == heads_.end()) throw LookupError("model has no decoder for task '" + name + "'");
    return it->second;
  }

  template <class T>
  const T& head_as(const std::string& name) const {
    const T* h = std::get_if<T>(&head(name));
    if (!h) throw ContractError("decoder for task '" + name + "' has a different kind");
    return *h;
  }

  std::vector<Parameter*> encoder_parameters() const { return encoder_.parameters(); }

 private:
  ModelConfig config_;
  ParamStore store_;
  Encoder encoder_;
  std::map<std::string, Head> heads_;
  std::vector<HeadSpec> specs_;
};

/// Copies parameters present in both models with equal names; every
/// parameter of `names` must exist with the same shape in both.
inline void copy_parameters(const Model& from, Model& to, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    const Parameter* src = from.store().find(n);
    Parameter* dst = to.store().find(n);
    if (!src || !dst) throw ConfigError("parameter '" + n + "' missing when carrying weights across stages");
    if (!src->value.same_shape(dst->value))
      throw ConfigError("parameter '" + n + "' changes shape between stages: " + shape_string(src->value.shape()) +
                        " vs " + shape_string(dst->value.shape()));
    dst->value = src->value;
  }
}

inline std::vector<std::string> encoder_parameter_names(const Model& m) {
  std::vector<std::string> out;
  for (const auto* p : m.encoder_parameters()) out.push_back(p->name);
  return out;
}

}  // namespace sprl
