// SPDX-License-Identifier: Apache-2.0
//
// Transformer blocks in both normalisation orders, stacked transformers, the
// GPT2-style autoregressive LM and the BERT-style encoder with its MLM and
// NSP heads.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "anlm/attention.hpp"
#include "anlm/config.hpp"
#include "anlm/tensor.hpp"
#include "anlm/vocab.hpp"
#include "anlm/weight_set.hpp"

namespace anlm {

struct NormWeights {
  Vector gain;
  Vector bias;
};

struct FeedForwardWeights {
  Matrix w1;  // d_f x d_e
  Vector b1;
  Matrix w2;  // d_e x d_f
  Vector b2;
};

struct BlockWeights {
  MultiHeadWeights mha;
  FeedForwardWeights ffn;
  NormWeights ln1;
  NormWeights ln2;
};

struct BlockOptions {
  NormVariant variant = NormVariant::post;
  GeluMode gelu = GeluMode::tanh_approx;
  double eps = kLayerNormEps;
};

/// Position-wise W2 GELU(W1 c + b1) + b2 applied to every column.
Matrix feed_forward(const Matrix& c, const FeedForwardWeights& w, GeluMode gelu);

/// post: C = ln1(H + mha(H)),      out = ln2(C + ffn(C))
/// pre:  C = H + mha(ln1(H)),      out = C + ffn(ln2(C))
Matrix transformer_block(const Matrix& h, const BlockWeights& w, const AttentionMask& mask,
                         const BlockOptions& opts);

Matrix transformer_stack(const Matrix& h0, std::span<const BlockWeights> blocks, const AttentionMask& mask,
                         const BlockOptions& opts);

/// Block tensors "blk<l>.*" (l is 1-based).
BlockWeights read_block(const WeightSet& ws, std::size_t l, const ModelConfig& cfg);
void write_block(WeightSet& ws, std::size_t l, const BlockWeights& b);

struct Gpt2Weights {
  Matrix embedding;          // d_e x |V|, tied with the output
  Matrix positions;          // d_e x n
  NormWeights embedding_norm;  // at the input (post) or the output (pre)
  std::vector<BlockWeights> blocks;
  BlockOptions options{NormVariant::pre};

  static Gpt2Weights from_weight_set(const WeightSet& ws, const ModelConfig& cfg);
  WeightSet to_weight_set() const;

  std::size_t max_len() const { return positions.cols(); }
  std::size_t vocab_size() const { return embedding.cols(); }
};

/// Final hidden states H^[L] (after the output norm for the pre variant).
Matrix gpt2_hidden(std::span<const TokenId> ids, const Gpt2Weights& w);

/// One next-token distribution per position; distribution i depends only on
/// ids[0..i].
std::vector<Distribution> gpt2_forward(std::span<const TokenId> ids, const Gpt2Weights& w);

/// Appends the argmax of the last distribution `steps` times.
TokenSequence greedy_decode(const TokenSequence& prompt, const Gpt2Weights& w, std::size_t steps);

struct MlmHeadWeights {
  Matrix w;  // d_e x d_e
  Vector b;
  NormWeights norm;
  Vector output_bias;  // |V|
};

struct NspHeadWeights {
  Matrix w;  // 2 x d_e
  Vector b;  // 2
};

struct BertWeights {
  Matrix embedding;   // d_e x |V|, tied with the MLM output
  Matrix positions;   // d_e x n
  Vector segment_a;
  Vector segment_b;
  NormWeights embedding_norm;
  std::vector<BlockWeights> blocks;
  Matrix pooler_w;  // d_e x d_e, part of the backbone
  Vector pooler_b;
  std::optional<MlmHeadWeights> mlm;
  std::optional<NspHeadWeights> nsp;  // dropped after pretraining
  BlockOptions options{NormVariant::post};

  /// Heads are loaded when their tensors ("mlm.*", "nsp.*") are present.
  static BertWeights from_weight_set(const WeightSet& ws, const ModelConfig& cfg);
  WeightSet to_weight_set() const;
};

/// Segment ids implied by the [SEP] positions: A up to and including the
/// first [SEP], B afterwards. Validates the [CLS] ... [SEP] ([...] [SEP]) layout.
std::vector<Segment> bert_segments(std::span<const TokenId> ids, const SpecialTokens& specials);

/// H^[L] for an input that starts with [CLS] and ends with [SEP]. Uses the
/// sequence's own segment list when it has one.
Matrix bert_forward(const TokenSequence& seq, const BertWeights& w, const SpecialTokens& specials);

std::vector<Distribution> mlm_head(const Matrix& h, const BertWeights& w);

/// Pooled [CLS] column through the NSP classifier.
Distribution nsp_head(const Matrix& h, const BertWeights& w);

}  // namespace anlm
