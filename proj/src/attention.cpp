// SPDX-License-Identifier: Apache-2.0
#include "anlm/attention.hpp"

#include <cmath>
#include <limits>

#include "anlm/errors.hpp"

namespace anlm {

AttentionMask build_mask(std::size_t len, MaskMode mode) {
  if (len < 1) throw Error(ErrorCode::length, "attention mask length must be at least 1");
  AttentionMask mask{mode, Matrix(len, len)};
  if (mode == MaskMode::ar) {
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = i + 1; j < len; ++j) mask.scores(i, j) = -std::numeric_limits<double>::infinity();
  }
  return mask;
}

namespace {

Matrix project(const Matrix& xt, const Matrix& weight, const std::optional<Vector>& bias) {
  Matrix out = matmul(xt, weight);
  return bias ? add_row_bias(out, *bias) : out;
}

}  // namespace

HeadResult self_attention_head_detailed(const Matrix& x, const HeadWeights& w, const AttentionMask& mask) {
  const std::size_t len = x.cols();
  if (w.wq.rows() != x.rows() || w.wk.rows() != x.rows() || w.wv.rows() != x.rows() ||
      w.wq.cols() != w.wk.cols()) {
    throw Error(ErrorCode::shape, "attention head: input " + x.shape_string() + ", WQ " + w.wq.shape_string() +
                                      ", WK " + w.wk.shape_string() + ", WV " + w.wv.shape_string());
  }
  if (mask.size() != len || mask.scores.cols() != len) {
    throw Error(ErrorCode::shape, "attention head: mask " + mask.scores.shape_string() + " for sequence length " +
                                      std::to_string(len));
  }
  const Matrix xt = transpose(x);
  const Matrix q = project(xt, w.wq, w.bq);
  const Matrix k = project(xt, w.wk, w.bk);
  const Matrix v = project(xt, w.wv, w.bv);
  const double scale = 1.0 / std::sqrt(static_cast<double>(w.wq.cols()));

  Matrix scores = matmul(q, transpose(k));
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < len; ++j) scores(i, j) = scores(i, j) * scale + mask.scores(i, j);

  HeadResult result;
  result.weights = softmax_rows(scores);
  result.output = matmul(result.weights, v);
  return result;
}

Matrix self_attention_head(const Matrix& x, const HeadWeights& w, const AttentionMask& mask) {
  return self_attention_head_detailed(x, w, mask).output;
}

Matrix concat_heads(const Matrix& x, const MultiHeadWeights& w, const AttentionMask& mask) {
  if (w.heads.empty()) throw Error(ErrorCode::config, "multi-head attention needs at least one head");
  const std::size_t dv = w.heads.front().wv.cols();
  Matrix p(x.cols(), dv * w.heads.size());
  for (std::size_t m = 0; m < w.heads.size(); ++m) {
    if (w.heads[m].wv.cols() != dv) throw Error(ErrorCode::shape, "heads disagree on d_v");
    const Matrix pm = self_attention_head(x, w.heads[m], mask);
    for (std::size_t i = 0; i < pm.rows(); ++i)
      for (std::size_t c = 0; c < dv; ++c) p(i, m * dv + c) = pm(i, c);
  }
  return p;
}

Matrix multi_head_attention(const Matrix& x, const MultiHeadWeights& w, const AttentionMask& mask) {
  const Matrix p = concat_heads(x, w, mask);
  if (w.wo.rows() != p.cols()) {
    throw Error(ErrorCode::shape, "multi-head attention: P " + p.shape_string() + " vs WO " + w.wo.shape_string());
  }
  Matrix a = transpose(matmul(p, w.wo));
  return w.bo ? add_column_bias(a, *w.bo) : a;
}

}  // namespace anlm
