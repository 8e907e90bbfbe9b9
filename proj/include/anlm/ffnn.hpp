// SPDX-License-Identifier: Apache-2.0
//
// Fixed-window feedforward language model: the n context embeddings are
// concatenated, passed through L dense layers, and projected onto the
// vocabulary by an untied output matrix.
#pragma once

#include <span>
#include <vector>

#include "anlm/config.hpp"
#include "anlm/tensor.hpp"
#include "anlm/vocab.hpp"
#include "anlm/weight_set.hpp"

namespace anlm {

struct FfnnWeights {
  std::size_t context = 0;          // n
  Matrix embedding;                 // d0 x |V|
  std::vector<Matrix> weights;      // W^[l]: d_l x d_{l-1}, with n*d0 inputs at l=1
  std::vector<Vector> biases;       // b^[l]: d_l
  std::vector<Activation> activations;
  Matrix output;                    // |V| x d_L

  /// Reads "ffnn.E", "ffnn.W<l>", "ffnn.b<l>", "ffnn.U" (l is 1-based).
  static FfnnWeights from_weight_set(const WeightSet& ws, const ModelConfig& cfg);
  WeightSet to_weight_set() const;

  std::size_t vocab_size() const { return embedding.cols(); }
  std::size_t embedding_dim() const { return embedding.rows(); }
};

/// Concatenated input h^[0] of length n*d0.
Vector ffnn_concat(std::span<const TokenId> context, const FfnnWeights& w);

/// Next-token distribution for a context of exactly `w.context` tokens.
Distribution ffnn_forward(std::span<const TokenId> context, const FfnnWeights& w);

/// argmax of ffnn_forward, ties to the lowest id.
TokenId ffnn_predict(std::span<const TokenId> context, const FfnnWeights& w);

}  // namespace anlm
