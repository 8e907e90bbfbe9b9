// SPDX-License-Identifier: Apache-2.0
//
// Closed-form trainable-parameter counts per architecture and an enumeration
// counter over instantiated weights.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anlm/config.hpp"
#include "anlm/weight_set.hpp"

namespace anlm {

using Count = std::uint64_t;

struct CountReport {
  ModelConfig config;
  /// Components that add up to `total`, in table order.
  std::vector<std::pair<std::string, Count>> subtotals;
  /// Informational rows (per-block or per-layer sizes, tied components at 0)
  /// that are not part of the sum.
  std::vector<std::pair<std::string, Count>> details;
  Count total = 0;

  Count subtotal(const std::string& name) const;  // throws missing_tensor
  Count detail(const std::string& name) const;
};

/// Attention parameters of one block: 2 M d_e (d_k + d_v) + zeta (M (2 d_k + d_v) + d_e).
Count attention_block_count(const ModelConfig& cfg);
/// One full transformer block (attention, feedforward, two layer norms).
Count transformer_block_count(const ModelConfig& cfg);

CountReport count_gpt2(const ModelConfig& cfg);
CountReport count_bert(const ModelConfig& cfg, bool include_mlm, bool include_nsp);
CountReport count_rnn(const ModelConfig& cfg);
CountReport count_lstm(const ModelConfig& cfg);
CountReport count_ffnn(const ModelConfig& cfg);

/// Dispatches on cfg.arch; the BERT flags are ignored for other archs.
CountReport count_params(const ModelConfig& cfg, bool include_mlm = false, bool include_nsp = false);

/// Sum of element counts over every tensor.
Count enumerate_weights(const WeightSet& ws);

/// Aligned two-column text table.
std::string format_report_table(const CountReport& r);
/// One "name=value" line per subtotal and detail, then "total=<n>".
std::string format_report_kv(const CountReport& r);

}  // namespace anlm
