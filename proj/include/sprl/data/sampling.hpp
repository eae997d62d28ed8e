#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sprl/core/errors.hpp"
#include "sprl/core/random.hpp"

namespace sprl {

inline constexpr std::array<double, 6> kStandardFractions = {0.01, 0.05, 0.10, 0.25, 0.50, 1.00};

inline bool is_standard_fraction(double p) {
  return std::any_of(kStandardFractions.begin(), kStandardFractions.end(),
                     [p](double s) { return std::abs(s - p) < 1e-12; });
}

struct FractionSample {
  std::vector<std::size_t> indices;  // ascending, i.e. original order
  bool standard_fraction = true;
};

/// Uniform sample without replacement of max(1, round(p * n)) of n items.
/// All fractions drawn with one seed are prefixes of the same permutation,
/// so a smaller fraction's sample is a subset of a larger one's.
inline FractionSample sample_fraction(std::size_t n, double p, std::uint64_t seed) {
  if (n == 0) throw DomainError("cannot sample from an empty dataset");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("fraction must lie in (0, 1]");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order, rng);
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p * static_cast<double>(n))));
  FractionSample out;
  out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(k, n)));
  std::sort(out.indices.begin(), out.indices.end());
  out.standard_fraction = is_standard_fraction(p);
  return out;
}

template <class T>
std::vector<T> take(const std::vector<T>& items, const std::vector<std::size_t>& indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(items.at(i));
  return out;
}

}  // namespace sprl
