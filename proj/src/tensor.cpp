// SPDX-License-Identifier: Apache-2.0
#include "anlm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "anlm/errors.hpp"

namespace anlm {

namespace {

std::string vec_shape(const Vector& v) { return "(" + std::to_string(v.size()) + ")"; }

[[noreturn]] void shape_error(const std::string& op, const std::string& a, const std::string& b) {
  throw Error(ErrorCode::shape, op + ": incompatible shapes " + a + " and " + b);
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::shape: return "shape";
    case ErrorCode::length: return "length";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::out_of_vocabulary: return "out_of_vocabulary";
    case ErrorCode::empty_sequence: return "empty_sequence";
    case ErrorCode::undefined_distribution: return "undefined_distribution";
    case ErrorCode::format: return "format";
    case ErrorCode::config: return "config";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::io: return "io";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::duplicate_name: return "duplicate_name";
    case ErrorCode::missing_tensor: return "missing_tensor";
  }
  return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::shape, "matrix data length " + std::to_string(data_.size()) +
                                      " does not match shape " + shape_string());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::shape, "ragged row list");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::from_columns(std::span<const Vector> columns) {
  if (columns.empty()) return {};
  const std::size_t r = columns.front().size();
  Matrix m(r, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) m.set_column(j, columns[j]);
  return m;
}

Vector Matrix::column(std::size_t c) const {
  if (c >= cols_) throw Error(ErrorCode::out_of_range, "column " + std::to_string(c) + " of " + shape_string());
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void Matrix::set_column(std::size_t c, const Vector& v) {
  if (c >= cols_ || v.size() != rows_) shape_error("set_column", shape_string(), vec_shape(v));
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Vector Matrix::row(std::size_t r) const {
  if (r >= rows_) throw Error(ErrorCode::out_of_range, "row " + std::to_string(r) + " of " + shape_string());
  return Vector(std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                                    data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)));
}

Matrix Matrix::left_columns(std::size_t count) const {
  if (count > cols_) throw Error(ErrorCode::length, "requested " + std::to_string(count) + " columns of " + shape_string());
  Matrix m(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < count; ++c) m(r, c) = (*this)(r, c);
  return m;
}

std::string Matrix::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a.shape_string(), b.shape_string());
  Matrix out(a.rows(), b.cols());
  // i-k-j order keeps the inner loop contiguous in both b and out.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) shape_error("matvec", a.shape_string(), vec_shape(x));
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * x[k];
    out[i] = s;
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("add", a.shape_string(), b.shape_string());
  Matrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return out;
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) shape_error("add", vec_shape(a), vec_shape(b));
  Vector out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) shape_error("hadamard", vec_shape(a), vec_shape(b));
  Vector out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::shape, "dot: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Matrix add_column_bias(const Matrix& m, const Vector& bias) {
  if (bias.size() != m.rows()) shape_error("add_column_bias", m.shape_string(), vec_shape(bias));
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) += bias[r];
  return out;
}

Matrix add_row_bias(const Matrix& m, const Vector& bias) {
  if (bias.size() != m.cols()) shape_error("add_row_bias", m.shape_string(), vec_shape(bias));
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) += bias[c];
  return out;
}

double sigmoid(double x) {
  // Split on sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gelu(double x, GeluMode mode) {
  if (mode == GeluMode::exact) return x * normal_cdf(x);
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

double activate(double x, Activation act, GeluMode mode) {
  switch (act) {
    case Activation::sigmoid: return sigmoid(x);
    case Activation::tanh: return std::tanh(x);
    case Activation::identity: return x;
    case Activation::gelu: return gelu(x, mode);
  }
  return x;
}

Vector activate(const Vector& v, Activation act, GeluMode mode) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = activate(v[i], act, mode);
  return out;
}

Matrix activate(const Matrix& m, Activation act, GeluMode mode) {
  Matrix out = m;
  for (double& x : out.values()) x = activate(x, act, mode);
  return out;
}

Vector softmax(const Vector& v) {
  double max_finite = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (x != -std::numeric_limits<double>::infinity()) max_finite = std::max(max_finite, x);
  }
  if (max_finite == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorCode::undefined_distribution,
                "softmax: all " + std::to_string(v.size()) + " entries are -inf");
  }
  Vector out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - max_finite);  // exp(-inf) == 0 exactly
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const Vector p = softmax(m.row(r));
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = p[c];
  }
  return out;
}

Vector layer_norm(const Vector& x, const Vector& gain, const Vector& bias, double eps) {
  if (gain.size() != x.size() || bias.size() != x.size()) {
    shape_error("layer_norm", vec_shape(x), vec_shape(gain) + "/" + vec_shape(bias));
  }
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + eps);
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = gain[i] * ((x[i] - mean) * inv) + bias[i];
  return out;
}

Matrix layer_norm_columns(const Matrix& x, const Vector& gain, const Vector& bias, double eps) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) out.set_column(c, layer_norm(x.column(c), gain, bias, eps));
  return out;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::empty_sequence, "argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace anlm
