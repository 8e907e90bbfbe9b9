// SPDX-License-Identifier: Apache-2.0
#include "anlm/ffnn.hpp"

#include "anlm/errors.hpp"

namespace anlm {

FfnnWeights FfnnWeights::from_weight_set(const WeightSet& ws, const ModelConfig& cfg) {
  if (cfg.arch != Arch::ffnn) throw Error(ErrorCode::config, "config arch is not ffnn");
  cfg.validate();
  FfnnWeights w;
  w.context = cfg.max_len;
  w.embedding = ws.matrix("ffnn.E", cfg.d_e, cfg.vocab_size);
  std::size_t in = cfg.max_len * cfg.d_e;
  for (std::size_t l = 0; l < cfg.hidden.size(); ++l) {
    const std::string k = std::to_string(l + 1);
    w.weights.push_back(ws.matrix("ffnn.W" + k, cfg.hidden[l], in));
    w.biases.push_back(ws.vector("ffnn.b" + k, cfg.hidden[l]));
    w.activations.push_back(cfg.activation);
    in = cfg.hidden[l];
  }
  w.output = ws.matrix("ffnn.U", cfg.vocab_size, in);
  return w;
}

WeightSet FfnnWeights::to_weight_set() const {
  WeightSet ws;
  ws.add("ffnn.E", embedding);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const std::string k = std::to_string(l + 1);
    ws.add("ffnn.W" + k, weights[l]);
    ws.add("ffnn.b" + k, biases[l]);
  }
  ws.add("ffnn.U", output);
  return ws;
}

Vector ffnn_concat(std::span<const TokenId> context, const FfnnWeights& w) {
  if (context.size() != w.context) {
    throw Error(ErrorCode::length, "ffnn: context has " + std::to_string(context.size()) +
                                       " tokens, the model requires exactly " + std::to_string(w.context));
  }
  const std::size_t d0 = w.embedding_dim();
  Vector h(context.size() * d0);
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (context[i] >= w.vocab_size()) {
      throw Error(ErrorCode::out_of_range, "ffnn: token id " + std::to_string(context[i]) + " outside vocabulary");
    }
    for (std::size_t r = 0; r < d0; ++r) h[i * d0 + r] = w.embedding(r, context[i]);
  }
  return h;
}

Distribution ffnn_forward(std::span<const TokenId> context, const FfnnWeights& w) {
  Vector h = ffnn_concat(context, w);
  for (std::size_t l = 0; l < w.weights.size(); ++l) {
    h = activate(add(matvec(w.weights[l], h), w.biases[l]), w.activations[l]);
  }
  return softmax(matvec(w.output, h));
}

TokenId ffnn_predict(std::span<const TokenId> context, const FfnnWeights& w) {
  return static_cast<TokenId>(argmax(ffnn_forward(context, w).values()));
}

}  // namespace anlm
