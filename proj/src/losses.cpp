// SPDX-License-Identifier: Apache-2.0
#include "anlm/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "anlm/errors.hpp"
#include "anlm/rng.hpp"

namespace anlm {

double ce_loss(std::size_t target, const Distribution& y_hat) {
  if (target >= y_hat.size()) {
    throw Error(ErrorCode::out_of_range, "ce_loss: target id " + std::to_string(target) + " outside a distribution over " +
                                             std::to_string(y_hat.size()) + " tokens");
  }
  const double p = y_hat[target];
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(p);
}

double ce_loss_full(const Vector& truth, const Distribution& y_hat) {
  if (truth.size() != y_hat.size()) {
    throw Error(ErrorCode::shape, "ce_loss_full: truth (" + std::to_string(truth.size()) + ") vs estimate (" +
                                      std::to_string(y_hat.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (truth[j] == 0.0) continue;
    if (y_hat[j] == 0.0) return std::numeric_limits<double>::infinity();
    sum += truth[j] * std::log(y_hat[j]);
  }
  return -sum;
}

std::size_t ar_target_count(std::size_t len, const LanguageModel& model) {
  return len > model.min_context() ? len - model.min_context() : 0;
}

double ar_loss(std::span<const TokenId> ids, const LanguageModel& model) {
  if (ids.size() < 2) throw Error(ErrorCode::length, "ar_loss: need at least 2 tokens, got " + std::to_string(ids.size()));
  const std::size_t terms = ar_target_count(ids.size(), model);
  if (terms == 0) {
    throw Error(ErrorCode::length, "ar_loss: " + std::to_string(ids.size()) + " tokens leave no target after the " +
                                       std::to_string(model.min_context()) + "-token context");
  }
  const auto dists = model.predict(ids);
  double total = 0.0;
  for (std::size_t k = 0; k < terms; ++k) total += ce_loss(ids[model.min_context() + k], dists[k]);
  return total;
}

std::vector<std::size_t> MlmTarget::positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

std::vector<TokenId> MlmTarget::masked_tokens() const {
  std::vector<TokenId> out;
  for (std::size_t i : positions()) out.push_back(original[i]);
  return out;
}

namespace {

bool is_boundary(TokenId id, const SpecialTokens& specials) {
  return (specials.cls && id == *specials.cls) || (specials.sep && id == *specials.sep);
}

}  // namespace

MlmTarget mlm_corrupt_at(const TokenSequence& seq, std::span<const std::size_t> positions,
                         const SpecialTokens& specials) {
  if (!specials.mask) throw Error(ErrorCode::config, "vocabulary has no [MASK] token");
  seq.validate();
  MlmTarget t;
  t.original = seq.ids;
  t.corrupted = seq;
  t.mask.assign(seq.size(), false);
  for (std::size_t p : positions) {
    if (p >= seq.size()) {
      throw Error(ErrorCode::out_of_range, "mask position " + std::to_string(p) + " outside a sequence of " +
                                               std::to_string(seq.size()));
    }
    t.mask[p] = true;
    t.corrupted.ids[p] = *specials.mask;
  }
  t.corrupted.mlm_mask = t.mask;
  return t;
}

MlmTarget mlm_corrupt(const TokenSequence& seq, double rate, std::uint64_t seed, const SpecialTokens& specials) {
  if (!(rate > 0.0 && rate < 1.0)) throw Error(ErrorCode::config, "mask_rate must lie in (0, 1)");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (!is_boundary(seq.ids[i], specials)) eligible.push_back(i);
  if (eligible.empty()) throw Error(ErrorCode::empty_sequence, "mlm_corrupt: no maskable tokens in the sequence");

  auto count = static_cast<std::size_t>(std::floor(rate * static_cast<double>(seq.size())));
  count = std::clamp<std::size_t>(count, 1, eligible.size());

  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(count);
  std::sort(eligible.begin(), eligible.end());
  return mlm_corrupt_at(seq, eligible, specials);
}

double mlm_loss(const MlmTarget& target, std::span<const Distribution> distributions) {
  if (target.mask.size() != distributions.size() || target.original.size() != distributions.size()) {
    throw Error(ErrorCode::length, "mlm_loss: mask of " + std::to_string(target.mask.size()) + " positions vs " +
                                       std::to_string(distributions.size()) + " distributions");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < distributions.size(); ++i)
    if (target.mask[i]) total += ce_loss(target.original[i], distributions[i]);
  return total;
}

std::size_t corpus_target_count(std::size_t len, const LanguageModel& model) {
  return len > model.min_context() ? len - model.min_context() : 0;
}

double corpus_nll(std::span<const TokenId> corpus, const LanguageModel& model) {
  if (corpus.empty()) throw Error(ErrorCode::empty_sequence, "corpus_nll: empty corpus");
  if (corpus.size() < 2) throw Error(ErrorCode::length, "corpus_nll: need at least 2 tokens");
  double total = 0.0;
  for (std::size_t next = model.min_context(); next < corpus.size(); ++next) {
    total += ce_loss(corpus[next], next_token_distribution(model, corpus.first(next)));
  }
  return total;
}

}  // namespace anlm
