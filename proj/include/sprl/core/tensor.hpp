#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sprl/core/errors.hpp"

namespace sprl {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

/// Dense row-major array of rank 1 or 2. A rank-1 tensor of length n is
/// stored (and viewed by matrix code) as a 1 x n row.
class Tensor {
 public:
  Tensor() : Tensor(Shape{1}) {}

  explicit Tensor(Shape shape) : shape_(std::move(shape)) {
    check_shape();
    data_ = Matrix::Zero(rows(), cols());
  }

  Tensor(Shape shape, std::span<const double> values) : Tensor(std::move(shape)) {
    if (values.size() != size()) {
      throw DimensionError("tensor " + shape_string(shape_) + " needs " + std::to_string(size()) +
                           " values, got " + std::to_string(values.size()));
    }
    std::copy(values.begin(), values.end(), data_.data());
  }

  Tensor(Shape shape, std::initializer_list<double> values)
      : Tensor(std::move(shape), std::span<const double>(values.begin(), values.size())) {}

  /// Wraps a matrix; `as_vector` keeps a single-row result rank 1.
  static Tensor from_matrix(Matrix m, bool as_vector = false) {
    Tensor t;
    if (as_vector) {
      if (m.rows() != 1) throw DimensionError("vector tensor needs a single row");
      t.shape_ = {static_cast<std::size_t>(m.cols())};
    } else {
      t.shape_ = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
    }
    t.data_ = std::move(m);
    t.check_shape();
    return t;
  }

  static Tensor vector(std::span<const double> values) { return Tensor({values.size()}, values); }
  static Tensor vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, values);
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept {
    return std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  }
  std::size_t rows() const noexcept { return rank() == 1 ? 1 : shape_[0]; }
  std::size_t cols() const noexcept { return shape_.back(); }
  bool is_vector() const noexcept { return rank() == 1; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return {data_.data(), size()}; }
  std::span<double> values() noexcept { return {data_.data(), size()}; }

  double& operator[](std::size_t i) { return data_.data()[i]; }
  double operator[](std::size_t i) const { return data_.data()[i]; }
  double& at(std::size_t r, std::size_t c) { return data_(r, c); }
  double at(std::size_t r, std::size_t c) const { return data_(r, c); }
  double item() const {
    if (size() != 1) throw ContractError("item() on tensor " + shape_string(shape_));
    return data_.data()[0];
  }

  Matrix& mat() noexcept { return data_; }
  const Matrix& mat() const noexcept { return data_; }

  void fill(double v) { data_.setConstant(v); }
  void set_zero() { data_.setZero(); }

  bool all_finite() const { return data_.allFinite(); }

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void check_shape() const {
    if (shape_.empty() || shape_.size() > 2) {
      throw DimensionError("tensors have rank 1 or 2, got " + shape_string(shape_));
    }
    for (auto d : shape_) {
      if (d == 0) throw DimensionError("tensor dimensions must be positive: " + shape_string(shape_));
    }
  }

  Shape shape_;
  Matrix data_;
};

}  // namespace sprl
