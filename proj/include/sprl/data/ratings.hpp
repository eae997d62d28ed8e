#pragma once

#include <string>

#include "sprl/core/errors.hpp"

namespace sprl {

/// One Likert annotation: an integer 1..5 or "not applicable".
class Rating {
 public:
  static Rating of(int value) {
    if (value < 1 || value > 5) throw DataError("rating must be 1..5 or NA, got " + std::to_string(value));
    return Rating(value);
  }
  static Rating not_applicable() { return Rating(0); }

  static Rating parse(const std::string& text) {
    if (text == "NA") return not_applicable();
    if (text.size() == 1 && text[0] >= '1' && text[0] <= '5') return Rating(text[0] - '0');
    throw DataError("invalid rating '" + text + "'");
  }

  bool is_na() const noexcept { return value_ == 0; }
  /// The integer rating; only meaningful when !is_na().
  int value() const noexcept { return value_; }
  std::string str() const { return is_na() ? "NA" : std::to_string(value_); }

  friend bool operator==(Rating a, Rating b) { return a.value_ == b.value_; }

 private:
  explicit Rating(int v) : value_(v) {}
  int value_;
};

struct RawAnnotation {
  Rating rating;
  std::string property;
  std::string annotator;
};

/// 4 and 5 hold; 1, 2, 3 and NA do not.
inline bool map_binary(Rating r) { return !r.is_na() && r.value() >= 4; }

/// NA counts as 1; integers pass through.
inline double map_scalar(Rating r) { return r.is_na() ? 1.0 : static_cast<double>(r.value()); }

inline double merge_redundant(Rating a, Rating b) { return (map_scalar(a) + map_scalar(b)) / 2.0; }

/// Cut-point of the scalar scale: strictly greater than 3.
inline bool binarize_scalar(double s) { return s > 3.0; }

}  // namespace sprl
