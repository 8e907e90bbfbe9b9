// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "anlm/tensor.hpp"

namespace anlm {

/// Row-major tensor of any rank. Matrices are rank 2, bias/gain vectors rank 1.
struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;

  static Tensor from(const Matrix& m);
  static Tensor from(const Vector& v);

  std::size_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

/// Named-tensor container holding every trainable parameter of one model.
/// Iteration order is insertion order, which fixes the archive layout.
class WeightSet {
 public:
  using Entry = std::pair<std::string, Tensor>;

  void add(std::string name, Tensor tensor);  // throws duplicate_name
  void add(std::string name, const Matrix& m) { add(std::move(name), Tensor::from(m)); }
  void add(std::string name, const Vector& v) { add(std::move(name), Tensor::from(v)); }

  bool contains(const std::string& name) const { return index_.contains(name); }
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);

  /// Copies a rank-2 tensor out as a Matrix, checking the expected shape.
  Matrix matrix(const std::string& name, std::size_t rows, std::size_t cols) const;
  /// Copies a rank-1 tensor out as a Vector, checking the expected length.
  Vector vector(const std::string& name, std::size_t dim) const;

  /// Drops every tensor whose name starts with `prefix`; returns how many.
  std::size_t remove_prefix(const std::string& prefix);

  std::size_t tensor_count() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<Entry>& entries() noexcept { return entries_; }

  bool operator==(const WeightSet& other) const { return entries_ == other.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Byte-for-byte comparison of names, shapes and payloads (distinguishes -0.0
/// from 0.0 and compares NaN payloads).
bool bitwise_equal(const WeightSet& a, const WeightSet& b);

}  // namespace anlm
