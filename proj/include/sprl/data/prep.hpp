#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sprl/data/frames.hpp"
#include "sprl/data/instance.hpp"
#include "sprl/data/supersense.hpp"

namespace sprl {

/// Raw records use the dataset schema with three differences: a label is a
/// rating or a two-annotator rating pair, "sense_selections" may carry each
/// annotator's selected fine senses, and "propbank" may carry
/// {"label", "sense"} to be abstracted through a frame map.
struct PrepOptions {
  LabelMode mode = LabelMode::Binary;
  const SenseMap* senses = nullptr;
  const FrameMap* frames = nullptr;
};

/// Tab-separated "<fine sense>\t<supersense>" lines; a sense listed on
/// several lines maps to all of their supersenses.
inline SenseMap load_sense_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sense map " + path);
  SenseMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError(path + ": expected '<sense>\\t<supersense>'", lineno);
    const std::string ss = line.substr(tab + 1);
    try {
      supersense_index(ss);
    } catch (const LookupError& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
    map[line.substr(0, tab)].push_back(ss);
  }
  return map;
}

namespace detail {

inline LabelValue resolve_label(const nlohmann::json& j, LabelMode mode, const std::string& where) {
  if (j.is_array() && j.size() != 2)
    throw DataError(where + ": redundant annotation needs exactly two ratings, got " + std::to_string(j.size()));
  const LabelValue raw = label_from_json(j);
  if (mode == LabelMode::Binary) return binary_label(raw);
  return scalar_label(raw);
}

}  // namespace detail

inline Instance prepare_record(const nlohmann::json& j, const PrepOptions& opt) {
  if (!j.is_object()) throw DataError("record is not an object");
  nlohmann::json base = j;
  base.erase("labels");
  base.erase("sense_selections");
  base.erase("propbank");
  Instance in = instance_from_json(base);
  const std::string where = "instance " + in.instance_id();
  if (j.contains("labels")) {
    for (const auto& [prop, value] : j["labels"].items())
      in.labels.emplace(prop, detail::resolve_label(value, opt.mode, where + ", property '" + prop + "'"));
  }
  if (j.contains("sense_selections")) {
    if (!opt.senses) throw ConfigError("records carry sense selections but no sense map was given");
    if (in.supersense) throw DataError(where + ": both supersense and sense_selections given");
    in.supersense = supersense_counts(j["sense_selections"].get<std::vector<std::vector<std::string>>>(), *opt.senses);
  }
  if (j.contains("propbank")) {
    if (!opt.frames) throw ConfigError("records carry PropBank labels but no frame map was given");
    if (in.propbank_role) throw DataError(where + ": both propbank_role and propbank given");
    const auto& pb = j["propbank"];
    in.propbank_role = map_propbank(pb.at("label").get<std::string>(), pb.at("sense").get<std::string>(), *opt.frames);
  }
  return in;
}

/// Converts every line of a raw file; errors carry the line number.
inline std::vector<Instance> prepare_file(const std::string& path, const PrepOptions& opt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Instance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(prepare_record(nlohmann::json::parse(line), opt));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    } catch (const DataError& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    } catch (const LookupError& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
  }
  if (out.empty()) throw DataError(path + ": no records");
  return out;
}

struct PropertySummary {
  std::size_t count = 0;
  std::size_t positive = 0;  // binary: true; scalar: > 3
  double mean = 0.0;         // scalar labels; binary: positive rate
};

struct LabelSummary {
  std::size_t instances = 0;
  std::map<std::string, PropertySummary> properties;
  std::optional<double> mean_supersense_perplexity;
};

inline LabelSummary summarize_labels(const std::vector<Instance>& instances) {
  LabelSummary s;
  s.instances = instances.size();
  double perplexity_sum = 0.0;
  std::size_t with_supersense = 0;
  for (const auto& in : instances) {
    for (const auto& [prop, v] : in.labels) {
      auto& p = s.properties[prop];
      ++p.count;
      if (binary_label(v)) ++p.positive;
      p.mean += std::holds_alternative<bool>(v) ? (std::get<bool>(v) ? 1.0 : 0.0) : scalar_label(v);
    }
    if (in.supersense && !in.supersense->empty()) {
      perplexity_sum += perplexity(distribution_from_counts(*in.supersense));
      ++with_supersense;
    }
  }
  for (auto& [_, p] : s.properties) p.mean /= static_cast<double>(p.count);
  if (with_supersense) s.mean_supersense_perplexity = perplexity_sum / static_cast<double>(with_supersense);
  return s;
}

}  // namespace sprl
