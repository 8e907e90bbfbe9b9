// SPDX-License-Identifier: Apache-2.0
//
// Cross-entropy losses for autoregressive and masked language modelling, and
// MLM input corruption.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anlm/language_model.hpp"
#include "anlm/tensor.hpp"
#include "anlm/vocab.hpp"

namespace anlm {

/// -log y_hat[target]. Returns +inf (no exception) when that probability is 0.
double ce_loss(std::size_t target, const Distribution& y_hat);

/// -sum_j y[j] log y_hat[j] with 0 log 0 taken as 0. For a one-hot `truth`
/// this is bit-identical to ce_loss.
double ce_loss_full(const Vector& truth, const Distribution& y_hat);

/// Teacher-forced sum of ce_loss over every position that has a successor:
/// the model sees only ground-truth prefixes, in one predict() call.
double ar_loss(std::span<const TokenId> ids, const LanguageModel& model);

/// Number of terms ar_loss sums for a sequence of `len` tokens.
std::size_t ar_target_count(std::size_t len, const LanguageModel& model);

struct MlmTarget {
  TokenSequence corrupted;          // masked positions hold [MASK]
  std::vector<bool> mask;           // true at masked positions
  std::vector<TokenId> original;    // the uncorrupted ids

  std::vector<std::size_t> positions() const;
  /// Original tokens at the masked positions, in position order.
  std::vector<TokenId> masked_tokens() const;
};

/// Replaces max(1, floor(rate * len)) positions, chosen uniformly without
/// replacement among non-[CLS]/[SEP] tokens, by [MASK]. Deterministic in seed.
MlmTarget mlm_corrupt(const TokenSequence& seq, double rate, std::uint64_t seed, const SpecialTokens& specials);

/// Masks the given 0-based positions.
MlmTarget mlm_corrupt_at(const TokenSequence& seq, std::span<const std::size_t> positions,
                         const SpecialTokens& specials);

/// Sum over masked positions of -log y_hat_i[original_i].
double mlm_loss(const MlmTarget& target, std::span<const Distribution> distributions);

/// Sum over i of -log p(c[i+1] | window ending at c[i]), the window clipped to
/// the model's max_context(). Positions with fewer than min_context() tokens
/// of history are skipped.
double corpus_nll(std::span<const TokenId> corpus, const LanguageModel& model);

/// Number of terms corpus_nll sums.
std::size_t corpus_target_count(std::size_t len, const LanguageModel& model);

}  // namespace anlm
