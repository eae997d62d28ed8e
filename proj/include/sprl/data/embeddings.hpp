#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sprl/core/errors.hpp"
#include "sprl/core/random.hpp"
#include "sprl/core/tensor.hpp"

namespace sprl {

inline constexpr std::size_t kDefaultEmbeddingDim = 300;
inline constexpr double kOovRange = 0.01;

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

/// Vector for a token without a pretrained embedding: uniform in
/// [-0.01, 0.01], drawn from a stream keyed by (seed, token) so it does not
/// depend on which other tokens happen to be in the vocabulary.
inline std::vector<double> oov_vector(std::string_view token, std::uint64_t seed, std::size_t dim) {
  std::uint64_t s = seed ^ fnv1a(token);
  Rng rng(splitmix64(s));
  std::vector<double> v(dim);
  for (double& x : v) x = rng.uniform(-kOovRange, kOovRange);
  return v;
}

/// Frozen token -> vector table. Lookups lowercase the token first; tokens
/// never seen at construction fall back to their OOV vector.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, std::uint64_t oov_seed) : dim_(dim), oov_seed_(oov_seed) {
    if (dim == 0) throw ConfigError("embedding dimension must be positive");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t oov_seed() const noexcept { return oov_seed_; }
  std::size_t vocabulary_size() const noexcept { return index_.size(); }
  std::size_t pretrained_count() const noexcept { return pretrained_; }
  bool contains(std::string_view token) const { return index_.count(lowercase(token)) != 0; }
  bool is_pretrained(std::string_view token) const {
    auto it = index_.find(lowercase(token));
    return it != index_.end() && it->second < pretrained_;
  }

  /// Adds a pretrained row. Only used while building the table.
  void add_pretrained(const std::string& token, std::span<const double> values) {
    if (values.size() != dim_) throw ConfigError("embedding for '" + token + "' has wrong dimension");
    if (index_.count(token)) return;
    if (pretrained_ != rows_.size() / dim_) throw ContractError("pretrained rows must precede OOV rows");
    index_.emplace(token, rows_.size() / dim_);
    rows_.insert(rows_.end(), values.begin(), values.end());
    ++pretrained_;
  }

  void add_oov(const std::string& token) {
    if (index_.count(token)) return;
    index_.emplace(token, rows_.size() / dim_);
    const auto v = oov_vector(token, oov_seed_, dim_);
    rows_.insert(rows_.end(), v.begin(), v.end());
  }

  std::vector<double> vector(std::string_view token) const {
    const std::string key = lowercase(token);
    auto it = index_.find(key);
    if (it == index_.end()) return oov_vector(key, oov_seed_, dim_);
    const double* row = rows_.data() + it->second * dim_;
    return {row, row + dim_};
  }

  /// n x dim matrix of the sentence's embeddings.
  Tensor lookup(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) throw DomainError("cannot embed an empty sentence");
    Tensor out({tokens.size(), dim_});
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const std::string key = lowercase(tokens[t]);
      auto it = index_.find(key);
      if (it != index_.end()) {
        std::copy_n(rows_.data() + it->second * dim_, dim_, out.data() + t * dim_);
      } else {
        const auto v = oov_vector(key, oov_seed_, dim_);
        std::copy(v.begin(), v.end(), out.data() + t * dim_);
      }
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t oov_seed_;
  std::size_t pretrained_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> rows_;
};

/// Builds a table for `vocabulary` (lowercased) from a whitespace-separated
/// "token v1 ... v_dim" text file; vocabulary tokens absent from the file get
/// OOV vectors. Lines for tokens outside the vocabulary are skipped unparsed.
/// An empty path yields an all-OOV table.
inline EmbeddingTable load_embeddings(const std::string& path, const std::set<std::string>& vocabulary,
                                      std::uint64_t oov_seed, std::size_t dim = kDefaultEmbeddingDim) {
  EmbeddingTable table(dim, oov_seed);
  std::set<std::string> wanted;
  for (const auto& t : vocabulary) wanted.insert(lowercase(t));
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embeddings " + path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> values;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string_view rest(line);
      const auto start = rest.find_first_not_of(" \t");
      if (start == std::string_view::npos) continue;
      rest.remove_prefix(start);
      const auto end = rest.find_first_of(" \t");
      if (end == std::string_view::npos) throw ParseError(path + ": token without a vector", lineno);
      const std::string token(rest.substr(0, end));
      if (!wanted.count(token)) continue;
      rest.remove_prefix(end);
      values.clear();
      while (true) {
        const auto s = rest.find_first_not_of(" \t");
        if (s == std::string_view::npos) break;
        rest.remove_prefix(s);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
        if (ec != std::errc() || (ptr != rest.data() + rest.size() && *ptr != ' ' && *ptr != '\t'))
          throw ParseError(path + ": malformed number for token '" + token + "'", lineno);
        values.push_back(v);
        rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
      }
      if (values.size() != dim) {
        throw ConfigError(path + ": line " + std::to_string(lineno) + " has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(dim));
      }
      table.add_pretrained(token, values);
    }
  }
  for (const auto& t : wanted) table.add_oov(t);
  return table;
}

}  // namespace sprl
