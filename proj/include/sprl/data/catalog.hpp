#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sprl/core/errors.hpp"

namespace sprl {

/// Ordered, duplicate-free property names. Decoder output j belongs to
/// name(j) for the lifetime of a model.
class PropertyCatalog {
 public:
  PropertyCatalog() = default;
  explicit PropertyCatalog(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (!index_.emplace(names_[i], i).second) throw ConfigError("duplicate property '" + names_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("property '" + name + "' is not in the catalog");
    return it->second;
  }

  friend bool operator==(const PropertyCatalog& a, const PropertyCatalog& b) { return a.names_ == b.names_; }

  static PropertyCatalog spr1() {
    return PropertyCatalog({"instigation", "volition", "awareness", "sentient", "physically_existed",
                            "existed_before", "existed_during", "existed_after", "created", "destroyed",
                            "changed", "changed_state", "changed_possession", "changed_location",
                            "stationary", "location", "physical_contact", "manipulated"});
  }

  static PropertyCatalog spr2() {
    return PropertyCatalog({"instigation", "volition", "awareness", "sentient", "existed_before",
                            "existed_during", "existed_after", "changed_state", "changed_possession",
                            "change_of_location", "changed_state_continuous", "was_for_benefit", "was_used",
                            "partitive"});
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The 26 coarse WordNet noun supersenses.
inline constexpr std::array<std::string_view, 26> kSupersenses = {
    "noun.Tops",       "noun.act",      "noun.animal",   "noun.artifact",      "noun.attribute",
    "noun.body",       "noun.cognition", "noun.communication", "noun.event",     "noun.feeling",
    "noun.food",       "noun.group",    "noun.location", "noun.motive",        "noun.object",
    "noun.person",     "noun.phenomenon", "noun.plant",  "noun.possession",    "noun.process",
    "noun.quantity",   "noun.relation", "noun.shape",    "noun.state",         "noun.substance",
    "noun.time"};

/// The 16 sense-independent PropBank function tags.
inline constexpr std::array<std::string_view, 16> kPropbankRoles = {
    "PAG", "PPT", "GOL", "VSP", "PRD", "MNR", "LOC", "DIR",
    "EXT", "REC", "PRP", "CAU", "TMP", "ADV", "ADJ", "COM"};

template <std::size_t N>
std::size_t label_index(const std::array<std::string_view, N>& labels, std::string_view label,
                        const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (labels[i] == label) return i;
  throw LookupError(std::string("unknown ") + what + " '" + std::string(label) + "'");
}

inline std::size_t supersense_index(std::string_view s) { return label_index(kSupersenses, s, "supersense"); }
inline std::size_t propbank_role_index(std::string_view s) {
  return label_index(kPropbankRoles, s, "PropBank role");
}

}  // namespace sprl
