// SPDX-License-Identifier: Apache-2.0
//
// Uniform view over the autoregressive models (FFNN, RNN, LSTM, GPT2) used by
// losses, scoring, training and generation.
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "anlm/config.hpp"
#include "anlm/tensor.hpp"
#include "anlm/vocab.hpp"
#include "anlm/weight_set.hpp"

namespace anlm {

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  /// Next-token distributions for every position that has enough context:
  /// entry k predicts ids[min_context() + k] from ids[0 .. min_context() + k).
  /// The last entry predicts the token following the whole input.
  virtual std::vector<Distribution> predict(std::span<const TokenId> ids) const = 0;

  /// Fewest tokens the model needs before it can predict (n for FFNN, 1 otherwise).
  virtual std::size_t min_context() const = 0;
  /// Widest window the model conditions on.
  virtual std::size_t max_context() const = 0;
  /// Longest input accepted by predict(); FFNN models slide their window.
  virtual std::size_t max_input() const { return max_context(); }
  virtual std::size_t vocab_size() const = 0;
};

/// Builds the model for an AR architecture from its weights. BERT is rejected
/// (it is not an autoregressive model).
std::unique_ptr<LanguageModel> make_language_model(const ModelConfig& cfg, const WeightSet& ws);

/// Distribution of the token after `context`, using at most max_context()
/// trailing tokens.
Distribution next_token_distribution(const LanguageModel& model, std::span<const TokenId> context);

/// Greedy continuation with a sliding window of max_context() tokens.
std::vector<TokenId> greedy_continue(const LanguageModel& model, std::span<const TokenId> prompt,
                                     std::size_t steps);

}  // namespace anlm
