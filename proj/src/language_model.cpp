// SPDX-License-Identifier: Apache-2.0
#include "anlm/language_model.hpp"

#include <algorithm>

#include "anlm/errors.hpp"
#include "anlm/ffnn.hpp"
#include "anlm/recurrent.hpp"
#include "anlm/transformer.hpp"

namespace anlm {

namespace {

void check_length(std::span<const TokenId> ids, std::size_t lo, std::size_t hi) {
  if (ids.size() < lo || ids.size() > hi) {
    throw Error(ErrorCode::length, "input of " + std::to_string(ids.size()) + " tokens outside the accepted range [" +
                                       std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

class FfnnModel final : public LanguageModel {
 public:
  explicit FfnnModel(FfnnWeights w) : w_(std::move(w)) {}

  std::vector<Distribution> predict(std::span<const TokenId> ids) const override {
    check_length(ids, w_.context, static_cast<std::size_t>(-1));
    std::vector<Distribution> out;
    out.reserve(ids.size() - w_.context + 1);
    for (std::size_t end = w_.context; end <= ids.size(); ++end) {
      out.push_back(ffnn_forward(ids.subspan(end - w_.context, w_.context), w_));
    }
    return out;
  }
  std::size_t min_context() const override { return w_.context; }
  std::size_t max_context() const override { return w_.context; }
  std::size_t max_input() const override { return static_cast<std::size_t>(-1); }
  std::size_t vocab_size() const override { return w_.vocab_size(); }

 private:
  FfnnWeights w_;
};

class RecurrentModel final : public LanguageModel {
 public:
  RecurrentModel(RecurrentWeights w, std::size_t max_len) : w_(std::move(w)), max_len_(max_len) {}

  std::vector<Distribution> predict(std::span<const TokenId> ids) const override {
    check_length(ids, 1, max_len_);
    return recurrent_lm_forward(ids, w_);
  }
  std::size_t min_context() const override { return 1; }
  std::size_t max_context() const override { return max_len_; }
  std::size_t vocab_size() const override { return w_.embedding.cols(); }

 private:
  RecurrentWeights w_;
  std::size_t max_len_;
};

class Gpt2Model final : public LanguageModel {
 public:
  explicit Gpt2Model(Gpt2Weights w) : w_(std::move(w)) {}

  std::vector<Distribution> predict(std::span<const TokenId> ids) const override {
    check_length(ids, 1, w_.max_len());
    return gpt2_forward(ids, w_);
  }
  std::size_t min_context() const override { return 1; }
  std::size_t max_context() const override { return w_.max_len(); }
  std::size_t vocab_size() const override { return w_.vocab_size(); }

 private:
  Gpt2Weights w_;
};

}  // namespace

std::unique_ptr<LanguageModel> make_language_model(const ModelConfig& cfg, const WeightSet& ws) {
  switch (cfg.arch) {
    case Arch::ffnn: return std::make_unique<FfnnModel>(FfnnWeights::from_weight_set(ws, cfg));
    case Arch::rnn:
    case Arch::lstm: return std::make_unique<RecurrentModel>(RecurrentWeights::from_weight_set(ws, cfg), cfg.max_len);
    case Arch::gpt2: return std::make_unique<Gpt2Model>(Gpt2Weights::from_weight_set(ws, cfg));
    case Arch::bert: break;
  }
  throw Error(ErrorCode::config, "arch: bert is not an autoregressive language model");
}

Distribution next_token_distribution(const LanguageModel& model, std::span<const TokenId> context) {
  if (context.size() < model.min_context()) {
    throw Error(ErrorCode::length, "context of " + std::to_string(context.size()) + " tokens is shorter than the " +
                                       std::to_string(model.min_context()) + " the model needs");
  }
  const std::size_t take = std::min(context.size(), model.max_context());
  return model.predict(context.last(take)).back();
}

std::vector<TokenId> greedy_continue(const LanguageModel& model, std::span<const TokenId> prompt,
                                     std::size_t steps) {
  std::vector<TokenId> ids(prompt.begin(), prompt.end());
  for (std::size_t s = 0; s < steps; ++s) {
    ids.push_back(static_cast<TokenId>(argmax(next_token_distribution(model, ids).values())));
  }
  return ids;
}

}  // namespace anlm
