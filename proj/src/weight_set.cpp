// SPDX-License-Identifier: Apache-2.0
#include "anlm/weight_set.hpp"

#include <algorithm>
#include <cstring>

#include "anlm/errors.hpp"

namespace anlm {

Tensor Tensor::from(const Matrix& m) { return Tensor{{m.rows(), m.cols()}, m.storage()}; }

Tensor Tensor::from(const Vector& v) { return Tensor{{v.size()}, v.storage()}; }

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

void WeightSet::add(std::string name, Tensor tensor) {
  if (tensor.data.size() != tensor.element_count()) {
    throw Error(ErrorCode::shape, "tensor '" + name + "' payload does not match its dims");
  }
  if (index_.contains(name)) throw Error(ErrorCode::duplicate_name, "duplicate tensor name '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(tensor));
}

const Tensor& WeightSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorCode::missing_tensor, "missing tensor '" + name + "'");
  return entries_[it->second].second;
}

Tensor& WeightSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorCode::missing_tensor, "missing tensor '" + name + "'");
  return entries_[it->second].second;
}

Matrix WeightSet::matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
  const Tensor& t = at(name);
  if (t.dims.size() != 2 || t.dims[0] != rows || t.dims[1] != cols) {
    throw Error(ErrorCode::shape, "tensor '" + name + "' expected shape (" + std::to_string(rows) + "x" +
                                      std::to_string(cols) + ")");
  }
  return Matrix(rows, cols, t.data);
}

Vector WeightSet::vector(const std::string& name, std::size_t dim) const {
  const Tensor& t = at(name);
  if (t.dims.size() != 1 || t.dims[0] != dim) {
    throw Error(ErrorCode::shape, "tensor '" + name + "' expected shape (" + std::to_string(dim) + ")");
  }
  return Vector(t.data);
}

std::size_t WeightSet::remove_prefix(const std::string& prefix) {
  const auto before = entries_.size();
  std::erase_if(entries_, [&](const Entry& e) { return e.first.rfind(prefix, 0) == 0; });
  index_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].first, i);
  return before - entries_.size();
}

bool bitwise_equal(const WeightSet& a, const WeightSet& b) {
  if (a.tensor_count() != b.tensor_count()) return false;
  for (std::size_t i = 0; i < a.tensor_count(); ++i) {
    const auto& [na, ta] = a.entries()[i];
    const auto& [nb, tb] = b.entries()[i];
    if (na != nb || ta.dims != tb.dims || ta.data.size() != tb.data.size()) return false;
    if (!ta.data.empty() && std::memcmp(ta.data.data(), tb.data.data(), ta.data.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace anlm
