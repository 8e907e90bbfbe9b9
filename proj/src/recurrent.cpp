// SPDX-License-Identifier: Apache-2.0
#include "anlm/recurrent.hpp"

#include <cmath>

#include "anlm/errors.hpp"

namespace anlm {

namespace {

void check_dims(const Vector& h_prev, const Vector& x, const Matrix& U, const Matrix& W, const Vector& b) {
  const std::size_t d = h_prev.size();
  if (x.size() != d || U.rows() != d || U.cols() != d || W.rows() != d || W.cols() != d || b.size() != d) {
    throw Error(ErrorCode::shape, "recurrent cell: state (" + std::to_string(d) + "), input (" +
                                      std::to_string(x.size()) + "), U " + U.shape_string() + ", W " +
                                      W.shape_string() + ", b (" + std::to_string(b.size()) + ")");
  }
}

Vector preactivation(const Vector& h_prev, const Vector& x, const LstmGateWeights& g) {
  check_dims(h_prev, x, g.U, g.W, g.b);
  return add(add(matvec(g.U, h_prev), matvec(g.W, x)), g.b);
}

LstmGateWeights read_gate(const WeightSet& ws, const std::string& prefix, const char* gate, std::size_t d) {
  return {ws.matrix(prefix + "U" + gate, d, d), ws.matrix(prefix + "W" + gate, d, d),
          ws.vector(prefix + "b" + gate, d)};
}

void write_gate(WeightSet& ws, const std::string& prefix, const char* gate, const LstmGateWeights& g) {
  ws.add(prefix + "U" + gate, g.U);
  ws.add(prefix + "W" + gate, g.W);
  ws.add(prefix + "b" + gate, g.b);
}

}  // namespace

RecurrentWeights RecurrentWeights::from_weight_set(const WeightSet& ws, const ModelConfig& cfg) {
  if (cfg.arch != Arch::rnn && cfg.arch != Arch::lstm) throw Error(ErrorCode::config, "config arch is not rnn/lstm");
  cfg.validate();
  const std::size_t d = cfg.d_e;
  RecurrentWeights w;
  w.kind = cfg.arch == Arch::rnn ? RecurrentKind::rnn : RecurrentKind::lstm;
  w.embedding = ws.matrix("emb.E", d, cfg.vocab_size);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    if (w.kind == RecurrentKind::rnn) {
      const std::string p = "rnn.l" + std::to_string(l + 1) + ".";
      w.rnn_layers.push_back({ws.matrix(p + "W", d, d), ws.matrix(p + "U", d, d), ws.vector(p + "b", d), cfg.activation});
    } else {
      const std::string p = "lstm.l" + std::to_string(l + 1) + ".";
      w.lstm_layers.push_back({read_gate(ws, p, "Q", d), read_gate(ws, p, "P", d), read_gate(ws, p, "R", d),
                               read_gate(ws, p, "S", d)});
    }
  }
  return w;
}

WeightSet RecurrentWeights::to_weight_set() const {
  WeightSet ws;
  ws.add("emb.E", embedding);
  for (std::size_t l = 0; l < rnn_layers.size(); ++l) {
    const std::string p = "rnn.l" + std::to_string(l + 1) + ".";
    ws.add(p + "W", rnn_layers[l].W);
    ws.add(p + "U", rnn_layers[l].U);
    ws.add(p + "b", rnn_layers[l].b);
  }
  for (std::size_t l = 0; l < lstm_layers.size(); ++l) {
    const std::string p = "lstm.l" + std::to_string(l + 1) + ".";
    write_gate(ws, p, "Q", lstm_layers[l].q);
    write_gate(ws, p, "P", lstm_layers[l].p);
    write_gate(ws, p, "R", lstm_layers[l].r);
    write_gate(ws, p, "S", lstm_layers[l].s);
  }
  return ws;
}

Vector rnn_cell(const Vector& h_prev, const Vector& x, const RnnLayerWeights& w) {
  check_dims(h_prev, x, w.U, w.W, w.b);
  return activate(add(add(matvec(w.U, h_prev), matvec(w.W, x)), w.b), w.activation);
}

LstmStep lstm_cell_detailed(const Vector& h_prev, const Vector& c_prev, const Vector& x,
                            const LstmLayerWeights& w) {
  if (c_prev.size() != h_prev.size()) throw Error(ErrorCode::shape, "lstm: hidden and context states differ in size");
  LstmStep step;
  step.q = activate(preactivation(h_prev, x, w.q), Activation::tanh);
  step.p = activate(preactivation(h_prev, x, w.p), Activation::sigmoid);
  const Vector kept = hadamard(c_prev, step.p);
  step.r = activate(preactivation(h_prev, x, w.r), Activation::sigmoid);
  const Vector added = hadamard(step.q, step.r);
  step.state.c = add(added, kept);
  step.s = activate(preactivation(h_prev, x, w.s), Activation::sigmoid);
  step.state.h = hadamard(step.s, activate(step.state.c, Activation::tanh));
  return step;
}

LstmState lstm_cell(const Vector& h_prev, const Vector& c_prev, const Vector& x, const LstmLayerWeights& w) {
  return lstm_cell_detailed(h_prev, c_prev, x, w).state;
}

Matrix unroll(const Matrix& x, std::span<const RnnLayerWeights> layers) {
  if (layers.empty()) throw Error(ErrorCode::config, "unroll: no layers");
  if (x.cols() == 0) throw Error(ErrorCode::empty_sequence, "unroll: empty sequence");
  Matrix current = x;
  for (const auto& layer : layers) {
    Matrix next(current.rows(), current.cols());
    Vector h(current.rows());
    for (std::size_t i = 0; i < current.cols(); ++i) {
      h = rnn_cell(h, current.column(i), layer);
      next.set_column(i, h);
    }
    current = std::move(next);
  }
  return current;
}

Matrix unroll(const Matrix& x, std::span<const LstmLayerWeights> layers) {
  if (layers.empty()) throw Error(ErrorCode::config, "unroll: no layers");
  if (x.cols() == 0) throw Error(ErrorCode::empty_sequence, "unroll: empty sequence");
  Matrix current = x;
  for (const auto& layer : layers) {
    Matrix next(current.rows(), current.cols());
    LstmState state{Vector(current.rows()), Vector(current.rows())};
    for (std::size_t i = 0; i < current.cols(); ++i) {
      state = lstm_cell(state.h, state.c, current.column(i), layer);
      next.set_column(i, state.h);
    }
    current = std::move(next);
  }
  return current;
}

std::vector<Distribution> recurrent_lm_forward(std::span<const TokenId> ids, const RecurrentWeights& w) {
  const Matrix x = embed(ids, w.embedding);
  const Matrix h = w.kind == RecurrentKind::rnn ? unroll(x, std::span<const RnnLayerWeights>(w.rnn_layers))
                                                : unroll(x, std::span<const LstmLayerWeights>(w.lstm_layers));
  std::vector<Distribution> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < h.cols(); ++i) out.push_back(softmax(tied_logits(h.column(i), w.embedding)));
  return out;
}

}  // namespace anlm
