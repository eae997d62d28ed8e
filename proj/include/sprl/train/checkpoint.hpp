#pragma once

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sprl/train/config.hpp"
#include "sprl/train/model.hpp"

namespace sprl {

inline constexpr const char* kCheckpointMagic = "SPRLCKPT";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  std::vector<HeadSpec> heads;
  int epoch = 0;
  double dev_metric = 0.0;
  std::vector<std::pair<std::string, Tensor>> tensors;  // model parameter order

  const PropertyCatalog& target_catalog() const {
    for (const auto& h : heads)
      if (h.name == config.target.name) return h.catalog;
    throw LoadError("checkpoint has no decoder for its target task");
  }
};

inline Checkpoint snapshot(const Model& model, const TrainConfig& config, int epoch, double dev_metric) {
  Checkpoint c;
  c.config = config;
  c.heads = model.head_specs();
  c.epoch = epoch;
  c.dev_metric = dev_metric;
  for (const auto* p : model.store().all()) c.tensors.emplace_back(p->name, p->value);
  return c;
}

/// Overwrites the model's parameters with the checkpoint's tensors.
inline void load_into(const Checkpoint& c, Model& model) {
  if (c.tensors.size() != model.store().size())
    throw LoadError("checkpoint has " + std::to_string(c.tensors.size()) + " tensors, model expects " +
                    std::to_string(model.store().size()));
  for (const auto& [name, t] : c.tensors) {
    Parameter* p = model.store().find(name);
    if (!p) throw LoadError("checkpoint tensor '" + name + "' has no matching parameter");
    if (!p->value.same_shape(t))
      throw LoadError("tensor '" + name + "' has shape " + shape_string(t.shape()) + ", model expects " +
                      shape_string(p->value.shape()));
  }
  for (const auto& [name, t] : c.tensors) model.store().find(name)->value = t;
}

inline std::unique_ptr<Model> restore_model(const Checkpoint& c) {
  auto model = std::make_unique<Model>(c.config.model, c.config.embedding_dim, c.heads);
  load_into(c, *model);
  return model;
}

namespace detail {

inline nlohmann::json head_to_json(const HeadSpec& h) {
  nlohmann::json j{{"name", h.name}, {"kind", to_string(h.kind)}, {"catalog", h.catalog.names()}};
  if (h.kind == TaskKind::Mt) j["vocab"] = h.vocab.content_words();
  return j;
}

inline HeadSpec head_from_json(const nlohmann::json& j) {
  HeadSpec h;
  h.name = j.at("name").get<std::string>();
  h.kind = parse_task_kind(j.at("kind").get<std::string>());
  h.catalog = PropertyCatalog(j.at("catalog").get<std::vector<std::string>>());
  if (j.contains("vocab")) h.vocab = TargetVocab(j["vocab"].get<std::vector<std::string>>());
  return h;
}

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xff) << (8 * (7 - i));
    return r;
  }
  return v;
}

}  // namespace detail

/// Text header (magic + version line, one JSON line with config, heads,
/// epoch, dev metric and tensor names/shapes), then every tensor as
/// little-endian float64 in header order.
inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
  nlohmann::json header;
  header["config"] = config_to_json(c.config);
  header["fingerprint"] = config_fingerprint(c.config);
  header["heads"] = nlohmann::json::array();
  for (const auto& h : c.heads) header["heads"].push_back(detail::head_to_json(h));
  header["epoch"] = c.epoch;
  header["dev_metric"] = c.dev_metric;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : c.tensors) header["tensors"].push_back({{"name", name}, {"shape", t.shape()}});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n' << header.dump() << '\n';
  for (const auto& [name, t] : c.tensors) {
    for (double v : t.values()) {
      const std::uint64_t bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw DataError("failed writing checkpoint " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path);
  std::string magic_line, header_line;
  if (!std::getline(in, magic_line)) throw LoadError(path + ": empty file");
  const std::string expected = std::string(kCheckpointMagic) + ' ';
  if (magic_line.rfind(expected, 0) != 0) throw LoadError(path + ": not a checkpoint file");
  if (magic_line != expected + std::to_string(kCheckpointVersion))
    throw LoadError(path + ": unsupported checkpoint version '" + magic_line.substr(expected.size()) + "'");
  if (!std::getline(in, header_line)) throw LoadError(path + ": truncated header");
  Checkpoint c;
  std::vector<std::pair<std::string, Shape>> layout;
  try {
    const auto header = nlohmann::json::parse(header_line);
    c.config = config_from_json(header.at("config"));
    if (header.at("fingerprint").get<std::string>() != config_fingerprint(c.config))
      throw LoadError(path + ": config fingerprint mismatch");
    for (const auto& h : header.at("heads")) c.heads.push_back(detail::head_from_json(h));
    c.epoch = header.at("epoch").get<int>();
    c.dev_metric = header.at("dev_metric").get<double>();
    for (const auto& t : header.at("tensors"))
      layout.emplace_back(t.at("name").get<std::string>(), t.at("shape").get<Shape>());
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path + ": corrupt header: " + e.what());
  } catch (const ConfigError& e) {
    throw LoadError(path + ": corrupt header: " + e.what());
  }
  for (const auto& [name, shape] : layout) {
    Tensor t;
    try {
      t = Tensor(shape);
    } catch (const Error& e) {
      throw LoadError(path + ": tensor '" + name + "': " + e.what());
    }
    for (double& v : t.values()) {
      std::uint64_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits))
        throw LoadError(path + ": truncated data in tensor '" + name + "'");
      v = std::bit_cast<double>(detail::to_little_endian(bits));
    }
    c.tensors.emplace_back(name, std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw LoadError(path + ": trailing bytes after tensor data");
  return c;
}

}  // namespace sprl
