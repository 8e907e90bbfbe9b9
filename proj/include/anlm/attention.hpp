// SPDX-License-Identifier: Apache-2.0
//
// Additive attention masks, single self-attention heads and multi-head
// attention. Inputs are d_e x len (one token per column); head outputs are
// len x d_v (one token per row).
#pragma once

#include <optional>
#include <vector>

#include "anlm/tensor.hpp"

namespace anlm {

enum class MaskMode { ar, ae };

/// len x len matrix with entries in {0, -inf}. AR masks the strict upper
/// triangle (query i may not see keys j > i); AE is all zeros.
struct AttentionMask {
  MaskMode mode = MaskMode::ar;
  Matrix scores;

  std::size_t size() const noexcept { return scores.rows(); }
};

AttentionMask build_mask(std::size_t len, MaskMode mode);

struct HeadWeights {
  Matrix wq;  // d_e x d_k
  Matrix wk;  // d_e x d_k
  Matrix wv;  // d_e x d_v
  std::optional<Vector> bq, bk, bv;  // present iff attention biases are enabled
};

struct MultiHeadWeights {
  std::vector<HeadWeights> heads;
  Matrix wo;  // M*d_v x d_e
  std::optional<Vector> bo;
};

struct HeadResult {
  Matrix output;   // P: len x d_v
  Matrix weights;  // row i is the attention distribution of query i
};

HeadResult self_attention_head_detailed(const Matrix& x, const HeadWeights& w, const AttentionMask& mask);

/// softmax_rows(S + (X^T Wq)(X^T Wk)^T / sqrt(d_k)) X^T Wv, with optional
/// biases added to the projected rows.
Matrix self_attention_head(const Matrix& x, const HeadWeights& w, const AttentionMask& mask);

/// Head outputs concatenated horizontally (head m in columns [m*d_v, (m+1)*d_v)).
Matrix concat_heads(const Matrix& x, const MultiHeadWeights& w, const AttentionMask& mask);

/// A = (P Wo)^T (+ bo per column), shape d_e x len.
Matrix multi_head_attention(const Matrix& x, const MultiHeadWeights& w, const AttentionMask& mask);

}  // namespace anlm
