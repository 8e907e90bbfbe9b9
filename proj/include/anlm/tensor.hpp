// SPDX-License-Identifier: Apache-2.0
//
// Dense binary64 vectors and matrices plus the handful of kernels every model
// in the kit is built from. Sequences are stored column-wise: a d_e x n matrix
// holds one token representation per column.
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace anlm {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  explicit Vector(std::vector<double> data) : data_(std::move(data)) {}
  Vector(std::initializer_list<double> values) : data_(values) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

/// Probability vector over the vocabulary (entries >= 0, sum 1).
using Distribution = Vector;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Builds a matrix whose j-th column is columns[j].
  static Matrix from_columns(std::span<const Vector> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  Vector column(std::size_t c) const;
  void set_column(std::size_t c, const Vector& v);
  Vector row(std::size_t r) const;
  /// Leading `count` columns.
  Matrix left_columns(std::size_t count) const;

  std::string shape_string() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class GeluMode { tanh_approx, exact };

enum class Activation { sigmoid, tanh, identity, gelu };

// ---- linear algebra ----

Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Vector add(const Vector& a, const Vector& b);
Vector hadamard(const Vector& a, const Vector& b);
double dot(std::span<const double> a, std::span<const double> b);
/// Adds `bias` to every column of `m`.
Matrix add_column_bias(const Matrix& m, const Vector& bias);
/// Adds `bias` to every row of `m`.
Matrix add_row_bias(const Matrix& m, const Vector& bias);

// ---- activations and normalisation ----

double sigmoid(double x);
double gelu(double x, GeluMode mode = GeluMode::tanh_approx);
/// Standard normal CDF.
double normal_cdf(double x);
double activate(double x, Activation act, GeluMode mode = GeluMode::tanh_approx);
Vector activate(const Vector& v, Activation act, GeluMode mode = GeluMode::tanh_approx);
Matrix activate(const Matrix& m, Activation act, GeluMode mode = GeluMode::tanh_approx);

/// Numerically stable softmax. Entries equal to -inf get probability exactly 0.
/// Throws ErrorCode::undefined_distribution when every entry is -inf.
Vector softmax(const Vector& v);
Matrix softmax_rows(const Matrix& m);

inline constexpr double kLayerNormEps = 1e-5;

/// gain * (x - mean) / sqrt(var + eps) + bias with the population variance.
Vector layer_norm(const Vector& x, const Vector& gain, const Vector& bias,
                  double eps = kLayerNormEps);
/// layer_norm applied to each column independently.
Matrix layer_norm_columns(const Matrix& x, const Vector& gain, const Vector& bias,
                          double eps = kLayerNormEps);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> v);

}  // namespace anlm
