#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "sprl/core/errors.hpp"
#include "sprl/data/catalog.hpp"

namespace sprl {

/// Maps (predicate sense, sense-specific label) to one of the 16 abstract
/// PropBank roles.
class FrameMap {
 public:
  void add(const std::string& predicate_sense, const std::string& label, const std::string& role) {
    propbank_role_index(role);
    entries_[{predicate_sense, label}] = role;
  }

  /// Two tab-separated columns per line: "<sense>:<label>" and the role.
  /// Blank lines and lines starting with '#' are skipped.
  static FrameMap load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open frame map " + path);
    FrameMap map;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      const auto colon = line.rfind(':', tab);
      if (tab == std::string::npos || colon == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
        throw ParseError(path + ": expected '<sense>:<label>\\t<role>'", lineno);
      try {
        map.add(line.substr(0, colon), line.substr(colon + 1, tab - colon - 1), line.substr(tab + 1));
      } catch (const LookupError& e) {
        throw ParseError(path + ": " + e.what(), lineno);
      }
    }
    return map;
  }

  std::size_t size() const noexcept { return entries_.size(); }

  const std::string& map(const std::string& label, const std::string& predicate_sense) const {
    auto it = entries_.find({predicate_sense, label});
    if (it == entries_.end())
      throw LookupError("no frame entry for label '" + label + "' of predicate sense '" + predicate_sense + "'");
    return it->second;
  }

 private:
  std::map<std::pair<std::string, std::string>, std::string> entries_;
};

inline const std::string& map_propbank(const std::string& label, const std::string& predicate_sense,
                                       const FrameMap& frames) {
  return frames.map(label, predicate_sense);
}

}  // namespace sprl
