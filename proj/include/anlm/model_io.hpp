// SPDX-License-Identifier: Apache-2.0
//
// Tensor archives and deterministic weight initialisation.
//
// Archive layout, all integers u64 little-endian:
//   "ANLM" | version (1) | generator id | tensor count |
//   per tensor: name length | name bytes | rank | dims... | binary64 LE payload
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "anlm/config.hpp"
#include "anlm/weight_set.hpp"

namespace anlm {

constexpr std::uint64_t kArchiveVersion = 1;

void write_weights(std::ostream& out, const WeightSet& ws, std::uint64_t generator_id);
void write_weights(std::ostream& out, const WeightSet& ws);
/// Reads a whole archive; nothing is returned on any error.
WeightSet read_weights(std::istream& in);

void save_weights(const WeightSet& ws, const std::string& path);
WeightSet load_weights(const std::string& path);

struct TensorSpec {
  std::string name;
  std::vector<std::uint64_t> dims;
};

/// Every tensor a model of this config owns, in archive order. BERT layouts
/// include the MLM and NSP heads.
std::vector<TensorSpec> weight_layout(const ModelConfig& cfg);

constexpr double kInitRange = 0.05;

/// Every parameter drawn uniformly from (-0.05, 0.05) by SplitMix64 seeded
/// with `seed`, tensors filled in layout order.
WeightSet init_weights(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace anlm
