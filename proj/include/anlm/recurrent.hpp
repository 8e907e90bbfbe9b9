// SPDX-License-Identifier: Apache-2.0
//
// Elman RNN and LSTM layers, time unrolling over stacked layers, and the
// recurrent language model with tied output embeddings. Every layer maps
// d_e -> d_e; initial hidden and context states are zero.
#pragma once

#include <span>
#include <vector>

#include "anlm/config.hpp"
#include "anlm/tensor.hpp"
#include "anlm/vocab.hpp"
#include "anlm/weight_set.hpp"

namespace anlm {

struct RnnLayerWeights {
  Matrix W;  // input weights, d_e x d_e
  Matrix U;  // recurrent weights, d_e x d_e
  Vector b;
  Activation activation = Activation::tanh;
};

struct LstmGateWeights {
  Matrix U;  // recurrent
  Matrix W;  // input
  Vector b;
};

/// Gate blocks: q is the tanh candidate, p the forget gate, r the add gate,
/// s the output gate.
struct LstmLayerWeights {
  LstmGateWeights q, p, r, s;
};

struct LstmState {
  Vector h;
  Vector c;
};

struct LstmStep {
  Vector q, p, r, s;  // candidate and gate activations
  LstmState state;
};

enum class RecurrentKind { rnn, lstm };

struct RecurrentWeights {
  RecurrentKind kind = RecurrentKind::rnn;
  Matrix embedding;  // d_e x |V|, tied with the output
  std::vector<RnnLayerWeights> rnn_layers;
  std::vector<LstmLayerWeights> lstm_layers;

  /// Names "rnn.l<k>.{W,U,b}" or "lstm.l<k>.{UQ,WQ,bQ,...,US,WS,bS}" plus
  /// "emb.E"; k is 1-based.
  static RecurrentWeights from_weight_set(const WeightSet& ws, const ModelConfig& cfg);
  WeightSet to_weight_set() const;
};

/// g(U h_prev + W x + b).
Vector rnn_cell(const Vector& h_prev, const Vector& x, const RnnLayerWeights& w);

/// One LSTM step; gate order forget -> add -> context update -> output.
LstmStep lstm_cell_detailed(const Vector& h_prev, const Vector& c_prev, const Vector& x,
                            const LstmLayerWeights& w);
LstmState lstm_cell(const Vector& h_prev, const Vector& c_prev, const Vector& x,
                    const LstmLayerWeights& w);

/// Runs the stack over the columns of `x` (d_e x len) and returns H^[L].
Matrix unroll(const Matrix& x, std::span<const RnnLayerWeights> layers);
Matrix unroll(const Matrix& x, std::span<const LstmLayerWeights> layers);

/// One distribution per position; position i only sees ids[0..i].
std::vector<Distribution> recurrent_lm_forward(std::span<const TokenId> ids, const RecurrentWeights& w);

}  // namespace anlm
