// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "anlm/recurrent.hpp"
#include "anlm/training.hpp"
#include "doctest.h"
#include "oracle/oracle.hpp"
#include "support/check.hpp"
#include "support/gen.hpp"

using namespace anlm;
using anlm::testgen::Gen;

namespace {

RnnLayerWeights random_rnn(Gen& g, std::size_t d, double scale = 0.7) {
  return {g.matrix(d, d, scale), g.matrix(d, d, scale), g.vector(d, scale), Activation::tanh};
}

LstmLayerWeights random_lstm(Gen& g, std::size_t d, double scale = 0.7) {
  auto gate = [&] { return LstmGateWeights{g.matrix(d, d, scale), g.matrix(d, d, scale), g.vector(d, scale)}; };
  return {gate(), gate(), gate(), gate()};
}

LstmLayerWeights zero_lstm(std::size_t d) {
  const LstmGateWeights z{Matrix(d, d), Matrix(d, d), Vector(d)};
  return {z, z, z, z};
}

oracle::Seq to_seq(const Matrix& x) {
  oracle::Seq s;
  for (std::size_t c = 0; c < x.cols(); ++c) s.push_back(x.column(c).storage());
  return s;
}

double max_diff(const Matrix& m, const oracle::Seq& s) {
  double worst = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) worst = std::max(worst, testgen::max_abs_diff(m.column(c), s[c]));
  return worst;
}

}  // namespace

TEST_CASE("rnn cell examples") {
  Gen g(1);
  const RnnLayerWeights zero{Matrix(3, 3), Matrix(3, 3), Vector(3), Activation::tanh};
  CHECK(rnn_cell(g.vector(3), g.vector(3), zero) == Vector(3));

  const RnnLayerWeights ident{Matrix::identity(3), Matrix(3, 3), Vector(3), Activation::tanh};
  const Vector x{0.01, -0.02, 0.03};
  const Vector h = rnn_cell(Vector(3), x, ident);
  for (std::size_t i = 0; i < 3; ++i) CHECK(h[i] == std::tanh(x[i]));

  CHECK_ERROR_CODE(rnn_cell(Vector(2), Vector(3), zero), ErrorCode::shape);
}

TEST_CASE("rnn cell matches a straight-line loop") {
  Gen g(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = g.integer(1, 6);
    const RnnLayerWeights w = random_rnn(g, d);
    const Vector hp = g.vector(d), x = g.vector(d);
    const Vector h = rnn_cell(hp, x, w);
    for (std::size_t i = 0; i < d; ++i) {
      double s = w.b[i];
      for (std::size_t k = 0; k < d; ++k) s += w.U(i, k) * hp[k] + w.W(i, k) * x[k];
      CHECK(std::abs(h[i] - std::tanh(s)) <= 1e-14);
    }
  }
}

TEST_CASE("lstm cell with zero weights") {
  const LstmStep step = lstm_cell_detailed(Vector(3), Vector(3), Vector{0.4, -1.0, 2.0}, zero_lstm(3));
  CHECK(step.q == Vector(3));
  CHECK(step.p == Vector(3, 0.5));
  CHECK(step.r == Vector(3, 0.5));
  CHECK(step.s == Vector(3, 0.5));
  CHECK(step.state.c == Vector(3));
  CHECK(step.state.h == Vector(3));
}

TEST_CASE("saturated forget gate passes the context through") {
  Gen g(3);
  LstmLayerWeights w = random_lstm(g, 4);
  w.p.U = Matrix(4, 4);
  w.p.W = Matrix(4, 4);
  w.p.b = Vector(4, 50.0);
  const Vector cp = g.vector(4, 2.0);
  const LstmStep step = lstm_cell_detailed(g.vector(4), cp, g.vector(4), w);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(1.0 - step.p[i] < 1e-20);
    CHECK(std::abs(step.state.c[i] - (step.q[i] * step.r[i] + cp[i])) <= 1e-15);
  }
}

TEST_CASE("lstm cell matches the oracle and gates stay in (0,1)") {
  Gen g(4);
  for (int t = 0; t < 50; ++t) {
    const ModelConfig cfg = recurrent_config(Arch::lstm, 3, 1, 5, 4);
    const WeightSet ws = testgen::random_weights(cfg, g.seed(), 1.0);
    const RecurrentWeights rw = RecurrentWeights::from_weight_set(ws, cfg);
    const Vector hp = g.vector(3), cp = g.vector(3), x = g.vector(3, 3.0);
    const LstmStep step = lstm_cell_detailed(hp, cp, x, rw.lstm_layers[0]);
    const oracle::LstmOut o = oracle::lstm_cell(ws, "lstm.l1.", hp.storage(), cp.storage(), x.storage());
    CHECK(testgen::max_abs_diff(step.state.h, o.h) <= 1e-14);
    CHECK(testgen::max_abs_diff(step.state.c, o.c) <= 1e-14);
    for (const Vector* gate : {&step.p, &step.r, &step.s})
      for (double v : *gate) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
      }
  }
}

TEST_CASE("unroll length one equals a single cell call") {
  Gen g(5);
  const RnnLayerWeights r = random_rnn(g, 3);
  const LstmLayerWeights l = random_lstm(g, 3);
  const Vector x = g.vector(3);
  const Matrix xs = Matrix::from_columns(std::vector<Vector>{x});
  CHECK(unroll(xs, std::span(&r, 1)).column(0) == rnn_cell(Vector(3), x, r));
  CHECK(unroll(xs, std::span(&l, 1)).column(0) == lstm_cell(Vector(3), Vector(3), x, l).h);
  CHECK_ERROR_CODE(unroll(Matrix(3, 0), std::span(&r, 1)), ErrorCode::empty_sequence);
}

TEST_CASE("unroll is causal") {
  Gen g(6);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = g.integer(1, 5), len = g.integer(2, 8), layers = g.integer(1, 3);
    std::vector<RnnLayerWeights> rs;
    std::vector<LstmLayerWeights> ls;
    for (std::size_t l = 0; l < layers; ++l) {
      rs.push_back(random_rnn(g, d));
      ls.push_back(random_lstm(g, d));
    }
    const Matrix x = g.matrix(d, len);
    const std::size_t cut = g.integer(1, len - 1);
    Matrix y = x;
    for (std::size_t c = cut; c < len; ++c)
      for (std::size_t r = 0; r < d; ++r) y(r, c) = g.real(-5, 5);
    const Matrix hr = unroll(x, std::span<const RnnLayerWeights>(rs)), hr2 = unroll(y, std::span<const RnnLayerWeights>(rs));
    const Matrix hl = unroll(x, std::span<const LstmLayerWeights>(ls)), hl2 = unroll(y, std::span<const LstmLayerWeights>(ls));
    CHECK(hr.left_columns(cut) == hr2.left_columns(cut));
    CHECK(hl.left_columns(cut) == hl2.left_columns(cut));
    CHECK(unroll(x.left_columns(cut), std::span<const RnnLayerWeights>(rs)) == hr.left_columns(cut));
  }
}

TEST_CASE("stacked unroll matches the nested-loop oracle") {
  Gen g(7);
  for (int t = 0; t < 30; ++t) {
    for (Arch arch : {Arch::rnn, Arch::lstm}) {
      const ModelConfig cfg = g.recurrent(arch);
      const WeightSet ws = testgen::random_weights(cfg, g.seed(), 0.8);
      const RecurrentWeights rw = RecurrentWeights::from_weight_set(ws, cfg);
      const Matrix x = g.matrix(cfg.d_e, g.integer(1, 8));
      const Matrix h = arch == Arch::rnn ? unroll(x, std::span<const RnnLayerWeights>(rw.rnn_layers))
                                         : unroll(x, std::span<const LstmLayerWeights>(rw.lstm_layers));
      const oracle::Seq o = arch == Arch::rnn ? oracle::rnn_unroll(ws, cfg.layers, to_seq(x))
                                              : oracle::lstm_unroll(ws, cfg.layers, to_seq(x));
      CHECK(max_diff(h, o) <= 1e-13);
    }
  }
}

TEST_CASE("identity activation reduces to a closed-form linear recurrence") {
  // d_e = 1: h_t = u h_{t-1} + w x_t + b.
  const RnnLayerWeights lin{Matrix(1, 1, 0.5), Matrix(1, 1, 0.8), Vector{0.1}, Activation::identity};
  const std::vector<double> xs{1.0, -2.0, 0.5, 3.0};
  Matrix x(1, xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) x(0, i) = xs[i];
  const Matrix h = unroll(x, std::span(&lin, 1));
  for (std::size_t t = 0; t < xs.size(); ++t) {
    double closed = 0.0;
    for (std::size_t k = 0; k <= t; ++k) closed += std::pow(0.8, double(t - k)) * (0.5 * xs[k] + 0.1);
    CHECK(std::abs(h(0, t) - closed) <= 1e-14);
  }
}

TEST_CASE("recurrent language model") {
  Gen g(8);
  for (Arch arch : {Arch::rnn, Arch::lstm}) {
    const ModelConfig cfg = recurrent_config(arch, 4, 2, 7, 20);
    WeightSet zeros = init_weights(cfg, 1);
    for (auto& e : zeros.entries())
      for (auto& v : e.second.data) v = 0.0;
    for (const auto& p : recurrent_lm_forward(std::vector<TokenId>{1, 2, 3}, RecurrentWeights::from_weight_set(zeros, cfg)))
      for (double v : p) CHECK(v == doctest::Approx(1.0 / 7).epsilon(1e-15));

    const RecurrentWeights w = RecurrentWeights::from_weight_set(testgen::random_weights(cfg, g.seed()), cfg);
    const std::vector<TokenId> a{1, 5, 2, 6}, b{1, 5, 4, 0};
    const auto pa = recurrent_lm_forward(a, w), pb = recurrent_lm_forward(b, w);
    REQUIRE(pa.size() == 4);
    CHECK(pa[0] == pb[0]);
    CHECK(pa[1] == pb[1]);
    CHECK(pa[2] != pb[2]);
    for (const auto& p : pa) CHECK(std::abs(testgen::sum(p) - 1.0) <= 1e-9);
    CHECK(RecurrentWeights::from_weight_set(w.to_weight_set(), cfg).to_weight_set() == w.to_weight_set());
  }
}

TEST_CASE("a trained toy lstm reproduces the training continuation") {
  const ModelConfig cfg = recurrent_config(Arch::lstm, 4, 1, 4, 8);
  std::vector<TokenId> corpus;
  for (int i = 0; i < 2; ++i) corpus.insert(corpus.end(), {0, 1, 2, 3});
  TrainOptions opts;
  opts.steps = 150;
  opts.lr = 1.0;
  const TrainState trained = train(cfg, init_weights(cfg, 3), corpus, opts);
  const RecurrentWeights w = RecurrentWeights::from_weight_set(trained.weights, cfg);
  const auto dists = recurrent_lm_forward(std::vector<TokenId>{0, 1, 2, 3, 0, 1, 2}, w);
  const std::vector<TokenId> expected{1, 2, 3, 0, 1, 2, 3};
  for (std::size_t i = 0; i < dists.size(); ++i) CHECK(argmax(dists[i].values()) == expected[i]);
}
