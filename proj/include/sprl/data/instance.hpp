#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sprl/core/errors.hpp"
#include "sprl/data/catalog.hpp"
#include "sprl/data/ratings.hpp"

namespace sprl {

using RatingPair = std::pair<Rating, Rating>;

/// A property label as it appears in a dataset file: a raw rating, a
/// two-way redundant rating pair, an already-binarized flag, or an
/// already-mapped scalar.
using LabelValue = std::variant<Rating, RatingPair, bool, double>;

enum class LabelMode { Binary, Scalar };

inline LabelMode parse_label_mode(const std::string& s) {
  if (s == "binary") return LabelMode::Binary;
  if (s == "scalar") return LabelMode::Scalar;
  throw ConfigError("mode must be 'binary' or 'scalar', got '" + s + "'");
}

inline std::string to_string(LabelMode m) { return m == LabelMode::Binary ? "binary" : "scalar"; }

/// Scalar view of a label in [1, 5].
inline double scalar_label(const LabelValue& v) {
  struct Visitor {
    double operator()(Rating r) const { return map_scalar(r); }
    double operator()(const RatingPair& p) const { return merge_redundant(p.first, p.second); }
    double operator()(bool) const { throw ContractError("a binary label has no scalar view"); }
    double operator()(double d) const { return d; }
  };
  return std::visit(Visitor{}, v);
}

inline bool binary_label(const LabelValue& v) {
  struct Visitor {
    bool operator()(Rating r) const { return map_binary(r); }
    bool operator()(const RatingPair& p) const { return binarize_scalar(merge_redundant(p.first, p.second)); }
    bool operator()(bool b) const { return b; }
    bool operator()(double d) const { return binarize_scalar(d); }
  };
  return std::visit(Visitor{}, v);
}

/// One predicate-argument pair in its sentence.
struct Instance {
  std::string sentence_id;
  std::optional<std::string> id;
  std::vector<std::string> tokens;
  std::size_t pred_head = 0;
  std::size_t arg_head = 0;
  std::map<std::string, LabelValue> labels;
  std::optional<std::map<std::string, double>> supersense;  // supersense -> annotator count
  std::optional<std::string> propbank_role;

  /// Stable identifier: the explicit id, else "sentence:pred:arg".
  std::string instance_id() const {
    if (id) return *id;
    return sentence_id + ":" + std::to_string(pred_head) + ":" + std::to_string(arg_head);
  }
};

/// A source/target sentence pair for translation pretraining.
struct ParallelPair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

namespace detail {

inline Rating rating_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Rating::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rating::of(j.get<int>());
  throw DataError("expected a rating (1..5 or \"NA\"), got " + j.dump());
}

inline nlohmann::json rating_to_json(Rating r) {
  if (r.is_na()) return "NA";
  return r.value();
}

inline LabelValue label_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_array()) {
    if (j.size() != 2) throw DataError("a redundant rating needs exactly two annotations, got " + j.dump());
    return RatingPair{rating_from_json(j[0]), rating_from_json(j[1])};
  }
  if (j.is_number_integer() || j.is_string()) return rating_from_json(j);
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!(v >= 1.0 && v <= 5.0)) throw DataError("scalar label " + j.dump() + " outside [1, 5]");
    return v;
  }
  throw DataError("unsupported label value " + j.dump());
}

inline nlohmann::json label_to_json(const LabelValue& v) {
  struct Visitor {
    nlohmann::json operator()(Rating r) const { return rating_to_json(r); }
    nlohmann::json operator()(const RatingPair& p) const {
      return nlohmann::json::array({rating_to_json(p.first), rating_to_json(p.second)});
    }
    nlohmann::json operator()(bool b) const { return b; }
    nlohmann::json operator()(double d) const { return d; }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace detail

inline Instance instance_from_json(const nlohmann::json& j) {
  static const char* known[] = {"sentence_id", "id", "tokens", "pred_head", "arg_head",
                                "labels", "supersense", "propbank_role"};
  if (!j.is_object()) throw DataError("record is not an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw DataError("unknown field '" + key + "'");
  }
  Instance in;
  try {
    in.sentence_id = j.at("sentence_id").get<std::string>();
    if (j.contains("id")) in.id = j["id"].get<std::string>();
    in.tokens = j.at("tokens").get<std::vector<std::string>>();
    in.pred_head = j.at("pred_head").get<std::size_t>();
    in.arg_head = j.at("arg_head").get<std::size_t>();
    if (j.contains("labels")) {
      for (const auto& [prop, value] : j["labels"].items()) in.labels.emplace(prop, detail::label_from_json(value));
    }
    if (j.contains("supersense")) {
      std::map<std::string, double> counts;
      for (const auto& [sense, count] : j["supersense"].items()) {
        supersense_index(sense);
        const double c = count.get<double>();
        if (!(c >= 0.0)) throw DataError("negative supersense weight for " + sense);
        counts.emplace(sense, c);
      }
      in.supersense = std::move(counts);
    }
    if (j.contains("propbank_role")) {
      in.propbank_role = j["propbank_role"].get<std::string>();
      propbank_role_index(*in.propbank_role);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
  if (in.tokens.empty()) throw DataError("record has no tokens");
  if (in.pred_head >= in.tokens.size() || in.arg_head >= in.tokens.size()) {
    throw DataError("head index out of range (pred " + std::to_string(in.pred_head) + ", arg " +
                    std::to_string(in.arg_head) + ", " + std::to_string(in.tokens.size()) + " tokens)");
  }
  return in;
}

/// Canonical JSON form; keys come out sorted.
inline nlohmann::json instance_to_json(const Instance& in) {
  nlohmann::json j;
  j["sentence_id"] = in.sentence_id;
  if (in.id) j["id"] = *in.id;
  j["tokens"] = in.tokens;
  j["pred_head"] = in.pred_head;
  j["arg_head"] = in.arg_head;
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [prop, value] : in.labels) labels[prop] = detail::label_to_json(value);
  j["labels"] = std::move(labels);
  if (in.supersense) j["supersense"] = *in.supersense;
  if (in.propbank_role) j["propbank_role"] = *in.propbank_role;
  return j;
}

namespace detail {

template <class F>
void for_each_json_line(const std::string& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
    try {
      f(j);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
  }
}

}  // namespace detail

inline std::vector<Instance> read_instances(const std::string& path) {
  std::vector<Instance> out;
  detail::for_each_json_line(path, [&](const nlohmann::json& j) { out.push_back(instance_from_json(j)); });
  return out;
}

inline void write_instances(const std::string& path, const std::vector<Instance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& in : instances) out << instance_to_json(in).dump() << '\n';
}

inline std::vector<ParallelPair> read_parallel(const std::string& path) {
  std::vector<ParallelPair> out;
  detail::for_each_json_line(path, [&](const nlohmann::json& j) {
    ParallelPair p;
    try {
      p.source = j.at("source").get<std::vector<std::string>>();
      p.target = j.at("target").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed pair: ") + e.what());
    }
    if (p.source.empty() || p.target.empty()) throw DataError("empty source or target sentence");
    out.push_back(std::move(p));
  });
  return out;
}

inline void write_parallel(const std::string& path, const std::vector<ParallelPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& p : pairs) out << nlohmann::json{{"source", p.source}, {"target", p.target}}.dump() << '\n';
}

/// Sorted union of the label keys present in `instances`.
inline PropertyCatalog catalog_from_instances(const std::vector<Instance>& instances) {
  std::map<std::string, int> seen;
  for (const auto& in : instances)
    for (const auto& [prop, _] : in.labels) seen[prop] = 1;
  std::vector<std::string> names;
  for (const auto& [name, _] : seen) names.push_back(name);
  return PropertyCatalog(std::move(names));
}

}  // namespace sprl
