// SPDX-License-Identifier: Apache-2.0
#include "anlm/transformer.hpp"

#include <cmath>

#include "anlm/errors.hpp"

namespace anlm {

Matrix feed_forward(const Matrix& c, const FeedForwardWeights& w, GeluMode gelu) {
  const Matrix inner = activate(add_column_bias(matmul(w.w1, c), w.b1), Activation::gelu, gelu);
  return add_column_bias(matmul(w.w2, inner), w.b2);
}

Matrix transformer_block(const Matrix& h, const BlockWeights& w, const AttentionMask& mask,
                         const BlockOptions& opts) {
  if (opts.variant == NormVariant::post) {
    const Matrix a = multi_head_attention(h, w.mha, mask);
    const Matrix c = layer_norm_columns(add(h, a), w.ln1.gain, w.ln1.bias, opts.eps);
    const Matrix d = feed_forward(c, w.ffn, opts.gelu);
    return layer_norm_columns(add(c, d), w.ln2.gain, w.ln2.bias, opts.eps);
  }
  const Matrix a = multi_head_attention(layer_norm_columns(h, w.ln1.gain, w.ln1.bias, opts.eps), w.mha, mask);
  const Matrix c = add(h, a);
  const Matrix d = feed_forward(layer_norm_columns(c, w.ln2.gain, w.ln2.bias, opts.eps), w.ffn, opts.gelu);
  return add(c, d);
}

Matrix transformer_stack(const Matrix& h0, std::span<const BlockWeights> blocks, const AttentionMask& mask,
                         const BlockOptions& opts) {
  Matrix h = h0;
  for (const auto& b : blocks) h = transformer_block(h, b, mask, opts);
  return h;
}

BlockWeights read_block(const WeightSet& ws, std::size_t l, const ModelConfig& cfg) {
  const std::string p = "blk" + std::to_string(l) + ".";
  BlockWeights b;
  for (std::size_t m = 1; m <= cfg.heads; ++m) {
    const std::string h = p + "h" + std::to_string(m) + ".";
    HeadWeights head{ws.matrix(h + "WQ", cfg.d_e, cfg.d_k), ws.matrix(h + "WK", cfg.d_e, cfg.d_k),
                     ws.matrix(h + "WV", cfg.d_e, cfg.d_v), {}, {}, {}};
    if (cfg.attention_bias) {
      head.bq = ws.vector(h + "bQ", cfg.d_k);
      head.bk = ws.vector(h + "bK", cfg.d_k);
      head.bv = ws.vector(h + "bV", cfg.d_v);
    }
    b.mha.heads.push_back(std::move(head));
  }
  b.mha.wo = ws.matrix(p + "WO", cfg.heads * cfg.d_v, cfg.d_e);
  if (cfg.attention_bias) b.mha.bo = ws.vector(p + "bO", cfg.d_e);
  b.ln1 = {ws.vector(p + "ln1G", cfg.d_e), ws.vector(p + "ln1B", cfg.d_e)};
  b.ffn = {ws.matrix(p + "ffn.W1", cfg.d_f, cfg.d_e), ws.vector(p + "ffn.b1", cfg.d_f),
           ws.matrix(p + "ffn.W2", cfg.d_e, cfg.d_f), ws.vector(p + "ffn.b2", cfg.d_e)};
  b.ln2 = {ws.vector(p + "ln2G", cfg.d_e), ws.vector(p + "ln2B", cfg.d_e)};
  return b;
}

void write_block(WeightSet& ws, std::size_t l, const BlockWeights& b) {
  const std::string p = "blk" + std::to_string(l) + ".";
  for (std::size_t m = 0; m < b.mha.heads.size(); ++m) {
    const std::string h = p + "h" + std::to_string(m + 1) + ".";
    const auto& head = b.mha.heads[m];
    ws.add(h + "WQ", head.wq);
    ws.add(h + "WK", head.wk);
    ws.add(h + "WV", head.wv);
    if (head.bq) ws.add(h + "bQ", *head.bq);
    if (head.bk) ws.add(h + "bK", *head.bk);
    if (head.bv) ws.add(h + "bV", *head.bv);
  }
  ws.add(p + "WO", b.mha.wo);
  if (b.mha.bo) ws.add(p + "bO", *b.mha.bo);
  ws.add(p + "ln1G", b.ln1.gain);
  ws.add(p + "ln1B", b.ln1.bias);
  ws.add(p + "ffn.W1", b.ffn.w1);
  ws.add(p + "ffn.b1", b.ffn.b1);
  ws.add(p + "ffn.W2", b.ffn.w2);
  ws.add(p + "ffn.b2", b.ffn.b2);
  ws.add(p + "ln2G", b.ln2.gain);
  ws.add(p + "ln2B", b.ln2.bias);
}

// ---------------------------------------------------------------- GPT2

Gpt2Weights Gpt2Weights::from_weight_set(const WeightSet& ws, const ModelConfig& cfg) {
  if (cfg.arch != Arch::gpt2) throw Error(ErrorCode::config, "config arch is not gpt2");
  cfg.validate();
  Gpt2Weights w;
  w.embedding = ws.matrix("emb.E", cfg.d_e, cfg.vocab_size);
  w.positions = ws.matrix("emb.pos", cfg.d_e, cfg.max_len);
  w.embedding_norm = {ws.vector("emb.lnG", cfg.d_e), ws.vector("emb.lnB", cfg.d_e)};
  for (std::size_t l = 1; l <= cfg.layers; ++l) w.blocks.push_back(read_block(ws, l, cfg));
  w.options = {cfg.norm, cfg.gelu, cfg.ln_eps};
  return w;
}

WeightSet Gpt2Weights::to_weight_set() const {
  WeightSet ws;
  ws.add("emb.E", embedding);
  ws.add("emb.pos", positions);
  ws.add("emb.lnG", embedding_norm.gain);
  ws.add("emb.lnB", embedding_norm.bias);
  for (std::size_t l = 0; l < blocks.size(); ++l) write_block(ws, l + 1, blocks[l]);
  return ws;
}

Matrix gpt2_hidden(std::span<const TokenId> ids, const Gpt2Weights& w) {
  if (ids.empty()) throw Error(ErrorCode::empty_sequence, "gpt2: empty sequence");
  if (ids.size() > w.max_len()) {
    throw Error(ErrorCode::length, "gpt2: sequence length " + std::to_string(ids.size()) +
                                       " exceeds maximum length " + std::to_string(w.max_len()));
  }
  const auto& en = w.embedding_norm;
  Matrix h = add_positions(embed(ids, w.embedding), w.positions);
  if (w.options.variant == NormVariant::post) h = layer_norm_columns(h, en.gain, en.bias, w.options.eps);
  h = transformer_stack(h, w.blocks, build_mask(ids.size(), MaskMode::ar), w.options);
  if (w.options.variant == NormVariant::pre) h = layer_norm_columns(h, en.gain, en.bias, w.options.eps);
  return h;
}

std::vector<Distribution> gpt2_forward(std::span<const TokenId> ids, const Gpt2Weights& w) {
  const Matrix h = gpt2_hidden(ids, w);
  std::vector<Distribution> out;
  out.reserve(h.cols());
  for (std::size_t i = 0; i < h.cols(); ++i) out.push_back(softmax(tied_logits(h.column(i), w.embedding)));
  return out;
}

TokenSequence greedy_decode(const TokenSequence& prompt, const Gpt2Weights& w, std::size_t steps) {
  if (prompt.ids.empty()) throw Error(ErrorCode::empty_sequence, "greedy_decode: empty prompt");
  if (prompt.size() + steps > w.max_len()) {
    throw Error(ErrorCode::length, "greedy_decode: prompt length " + std::to_string(prompt.size()) + " + steps " +
                                       std::to_string(steps) + " exceeds maximum length " +
                                       std::to_string(w.max_len()));
  }
  TokenSequence out;
  out.ids = prompt.ids;
  for (std::size_t s = 0; s < steps; ++s) {
    const auto dists = gpt2_forward(out.ids, w);
    out.ids.push_back(static_cast<TokenId>(argmax(dists.back().values())));
  }
  return out;
}

// ---------------------------------------------------------------- BERT

BertWeights BertWeights::from_weight_set(const WeightSet& ws, const ModelConfig& cfg) {
  if (cfg.arch != Arch::bert) throw Error(ErrorCode::config, "config arch is not bert");
  cfg.validate();
  const std::size_t d = cfg.d_e;
  BertWeights w;
  w.embedding = ws.matrix("emb.E", d, cfg.vocab_size);
  w.positions = ws.matrix("emb.pos", d, cfg.max_len);
  w.segment_a = ws.vector("emb.segA", d);
  w.segment_b = ws.vector("emb.segB", d);
  w.embedding_norm = {ws.vector("emb.lnG", d), ws.vector("emb.lnB", d)};
  for (std::size_t l = 1; l <= cfg.layers; ++l) w.blocks.push_back(read_block(ws, l, cfg));
  w.pooler_w = ws.matrix("pool.W", d, d);
  w.pooler_b = ws.vector("pool.b", d);
  if (ws.contains("mlm.W")) {
    w.mlm = MlmHeadWeights{ws.matrix("mlm.W", d, d), ws.vector("mlm.b", d),
                           {ws.vector("mlm.lnG", d), ws.vector("mlm.lnB", d)}, ws.vector("mlm.outB", cfg.vocab_size)};
  }
  if (ws.contains("nsp.W")) w.nsp = NspHeadWeights{ws.matrix("nsp.W", 2, d), ws.vector("nsp.b", 2)};
  w.options = {cfg.norm, cfg.gelu, cfg.ln_eps};
  return w;
}

WeightSet BertWeights::to_weight_set() const {
  WeightSet ws;
  ws.add("emb.E", embedding);
  ws.add("emb.pos", positions);
  ws.add("emb.segA", segment_a);
  ws.add("emb.segB", segment_b);
  ws.add("emb.lnG", embedding_norm.gain);
  ws.add("emb.lnB", embedding_norm.bias);
  for (std::size_t l = 0; l < blocks.size(); ++l) write_block(ws, l + 1, blocks[l]);
  ws.add("pool.W", pooler_w);
  ws.add("pool.b", pooler_b);
  if (mlm) {
    ws.add("mlm.W", mlm->w);
    ws.add("mlm.b", mlm->b);
    ws.add("mlm.lnG", mlm->norm.gain);
    ws.add("mlm.lnB", mlm->norm.bias);
    ws.add("mlm.outB", mlm->output_bias);
  }
  if (nsp) {
    ws.add("nsp.W", nsp->w);
    ws.add("nsp.b", nsp->b);
  }
  return ws;
}

std::vector<Segment> bert_segments(std::span<const TokenId> ids, const SpecialTokens& specials) {
  if (!specials.cls || !specials.sep) {
    throw Error(ErrorCode::format, "bert input requires [CLS] and [SEP] in the vocabulary");
  }
  if (ids.empty() || ids.front() != *specials.cls) {
    throw Error(ErrorCode::format, "bert input must start with [CLS]");
  }
  if (ids.back() != *specials.sep) throw Error(ErrorCode::format, "bert input must end with [SEP]");
  std::vector<Segment> segs(ids.size(), Segment::A);
  std::size_t seps = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    segs[i] = seps == 0 ? Segment::A : Segment::B;
    if (ids[i] == *specials.sep) ++seps;
  }
  if (seps > 2) throw Error(ErrorCode::format, "bert input has " + std::to_string(seps) + " [SEP] tokens (at most 2)");
  return segs;
}

Matrix bert_forward(const TokenSequence& seq, const BertWeights& w, const SpecialTokens& specials) {
  seq.validate();
  std::vector<Segment> segs = bert_segments(seq.ids, specials);
  if (!seq.segments.empty()) segs = seq.segments;
  if (seq.size() > w.positions.cols()) {
    throw Error(ErrorCode::length, "bert: sequence length " + std::to_string(seq.size()) +
                                       " exceeds maximum length " + std::to_string(w.positions.cols()));
  }
  const Matrix x = embed(seq.ids, w.embedding);
  Matrix h = add_positions(x, w.positions, segment_matrix(segs, w.segment_a, w.segment_b));
  h = layer_norm_columns(h, w.embedding_norm.gain, w.embedding_norm.bias, w.options.eps);
  return transformer_stack(h, w.blocks, build_mask(seq.size(), MaskMode::ae), w.options);
}

std::vector<Distribution> mlm_head(const Matrix& h, const BertWeights& w) {
  if (!w.mlm) throw Error(ErrorCode::missing_tensor, "bert weights have no MLM head");
  const auto& head = *w.mlm;
  const Matrix hm = activate(add_column_bias(matmul(head.w, h), head.b), Activation::gelu, w.options.gelu);
  const Matrix ho = layer_norm_columns(hm, head.norm.gain, head.norm.bias, w.options.eps);
  std::vector<Distribution> out;
  out.reserve(ho.cols());
  for (std::size_t i = 0; i < ho.cols(); ++i) {
    out.push_back(softmax(tied_logits(ho.column(i), w.embedding, head.output_bias)));
  }
  return out;
}

Distribution nsp_head(const Matrix& h, const BertWeights& w) {
  if (!w.nsp) throw Error(ErrorCode::missing_tensor, "bert weights have no NSP head");
  if (h.cols() == 0) throw Error(ErrorCode::empty_sequence, "nsp_head: empty hidden states");
  const Vector pooled = activate(add(matvec(w.pooler_w, h.column(0)), w.pooler_b), Activation::tanh);
  return softmax(add(matvec(w.nsp->w, pooled), w.nsp->b));
}

}  // namespace anlm
