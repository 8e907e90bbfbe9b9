// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <sstream>

#include "anlm/language_model.hpp"
#include "anlm/losses.hpp"
#include "anlm/training.hpp"
#include "doctest.h"
#include "support/check.hpp"
#include "support/gen.hpp"

using namespace anlm;
using anlm::testgen::Gen;

TEST_CASE("gradient of a quadratic") {
  Gen g(1);
  WeightSet ws;
  ws.add("a", g.matrix(3, 4, 2.0));
  ws.add("b", g.vector(5, 2.0));
  const LossFunctional sum_sq = [](const WeightSet& w) {
    double s = 0.0;
    for (const auto& e : w.entries())
      for (double v : e.second.data) s += v * v;
    return s;
  };
  const WeightSet grad = numerical_gradient(sum_sq, ws);
  REQUIRE(grad.tensor_count() == 2);
  for (std::size_t e = 0; e < 2; ++e) {
    CHECK(grad.entries()[e].first == ws.entries()[e].first);
    CHECK(grad.entries()[e].second.dims == ws.entries()[e].second.dims);
    const auto& theta = ws.entries()[e].second.data;
    const auto& d = grad.entries()[e].second.data;
    for (std::size_t i = 0; i < theta.size(); ++i)
      CHECK(std::abs(d[i] - 2 * theta[i]) <= 1e-8 * std::max(1.0, std::abs(2 * theta[i])));
  }
}

TEST_CASE("softmax cross-entropy gradient is y_hat - y") {
  Gen g(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = g.integer(2, 10), c = g.integer(0, n - 1);
    WeightSet ws;
    ws.add("z", g.vector(n, 3.0));
    const LossFunctional loss = [&](const WeightSet& w) { return ce_loss(c, softmax(w.vector("z", n))); };
    const WeightSet grad = numerical_gradient(loss, ws);
    const Distribution p = softmax(ws.vector("z", n));
    for (std::size_t j = 0; j < n; ++j) {
      const double analytic = p[j] - (j == c ? 1.0 : 0.0);
      CHECK(std::abs(grad.at("z").data[j] - analytic) <= 1e-6 * std::max(1.0, std::abs(analytic)));
    }
  }
}

TEST_CASE("ignored parameters get a zero gradient") {
  WeightSet ws;
  ws.add("used", Vector{0.3, -0.7});
  ws.add("unused", Vector{1.5, 2.5, -3.5});
  const LossFunctional loss = [](const WeightSet& w) {
    const auto& d = w.at("used").data;
    return std::sin(d[0]) + d[1] * d[1];
  };
  const WeightSet grad = numerical_gradient(loss, ws);
  for (double v : grad.at("unused").data) CHECK(std::abs(v) <= 1e-10);
  CHECK(std::abs(grad.at("used").data[0] - std::cos(0.3)) <= 1e-8);
}

TEST_CASE("non-finite losses are reported with the parameter name") {
  WeightSet ws;
  ws.add("w", Vector{0.5, 1.0 - 5e-6});
  const LossFunctional loss = [](const WeightSet& w) {
    const auto& d = w.at("w").data;
    return d[1] >= 1.0 ? std::numeric_limits<double>::infinity() : d[0] * d[0];
  };
  try {
    numerical_gradient(loss, ws);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite);
    CHECK(std::string(e.what()).find("w[1]") != std::string::npos);
  }
  WeightSet bad;
  bad.add("w", Vector{0.5, 2.0});
  CHECK_ERROR_CODE(numerical_gradient(loss, bad), ErrorCode::non_finite);
  CHECK_ERROR_CODE(numerical_gradient(loss, ws, 0.0), ErrorCode::config);
}

TEST_CASE("gd_step") {
  Gen g(3);
  WeightSet ws;
  ws.add("m", g.matrix(2, 3));
  ws.add("v", g.vector(4));
  WeightSet zero = ws;
  for (auto& e : zero.entries())
    for (auto& v : e.second.data) v = 0.0;

  const TrainState s0{ws, 0.3, 5};
  const TrainState same = gd_step(s0, zero);
  CHECK(same.weights == ws);
  CHECK(same.step == 6);
  CHECK(s0.step == 5);

  const TrainState cleared = gd_step(TrainState{ws, 1.0, 0}, ws);
  CHECK(cleared.weights == zero);

  CHECK_ERROR_CODE(gd_step(TrainState{ws, 0.0, 0}, zero), ErrorCode::config);
  WeightSet wrong;
  wrong.add("m", Matrix(3, 2));
  wrong.add("v", Vector(4));
  CHECK_ERROR_CODE(gd_step(s0, wrong), ErrorCode::shape);
}

TEST_CASE("descent on a two-parameter quadratic converges") {
  WeightSet ws;
  ws.add("theta", Vector{4.0, -2.5});
  const LossFunctional loss = [](const WeightSet& w) {
    const auto& t = w.at("theta").data;
    return (t[0] - 1.0) * (t[0] - 1.0) + 2.0 * (t[1] + 3.0) * (t[1] + 3.0);
  };
  TrainState s{ws, 0.1, 0};
  for (int i = 0; i < 200; ++i) s = gd_step(s, numerical_gradient(loss, s.weights));
  CHECK(loss(s.weights) < 1e-6);
  // Scalar oracle: each coordinate contracts by (1 - 2 lr k) per step.
  const auto& t = s.weights.at("theta").data;
  CHECK(std::abs(t[0] - (1.0 + 3.0 * std::pow(0.8, 200))) <= 1e-8);
  CHECK(std::abs(t[1] - (-3.0 + 0.5 * std::pow(0.6, 200))) <= 1e-8);
}

TEST_CASE("toy ffnn loss decreases monotonically") {
  const ModelConfig cfg = ffnn_config(3, 4, {8}, 10);
  Gen g(4);
  std::vector<TokenId> corpus;
  for (int i = 0; i < 3; ++i)
    for (TokenId id : {0, 3, 7, 1, 9, 2, 5, 8}) corpus.push_back(id);
  const LossFunctional objective = [&](const WeightSet& w) { return mean_corpus_loss(cfg, w, corpus); };
  TrainState s{init_weights(cfg, 42), 0.2, 0};
  double prev = objective(s.weights);
  for (int step = 0; step < 15; ++step) {
    s = gd_step(s, numerical_gradient(objective, s.weights));
    const double now = objective(s.weights);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("mean corpus loss averages every target once") {
  const std::vector<TokenId> corpus{1, 2, 3, 4, 5, 0, 1, 2, 3, 4, 5, 0, 1};
  const std::span<const TokenId> c(corpus);

  // The FFNN slides its window over the whole corpus in one piece.
  const ModelConfig ffnn = ffnn_config(2, 3, {4}, 6);
  const WeightSet fw = testgen::random_weights(ffnn, 9);
  const auto fm = make_language_model(ffnn, fw);
  CHECK(std::abs(mean_corpus_loss(ffnn, fw, corpus) - corpus_nll(corpus, *fm) / 11.0) <= 1e-12);

  // GPT2 (n = 5) sees chunks [0,5), [4,9), [8,13), each target exactly once.
  const ModelConfig gpt2 = gpt2_config(4, 1, 1, 2, 2, 4, 6, 5);
  const WeightSet gw = testgen::random_weights(gpt2, 9);
  const auto gm = make_language_model(gpt2, gw);
  const double chunks = ar_loss(c.subspan(0, 5), *gm) + ar_loss(c.subspan(4, 5), *gm) + ar_loss(c.subspan(8, 5), *gm);
  CHECK(std::abs(mean_corpus_loss(gpt2, gw, corpus) - chunks / 12.0) <= 1e-12);
}

TEST_CASE("train logs one line per step") {
  const ModelConfig cfg = ffnn_config(1, 2, {3}, 4);
  const std::vector<TokenId> corpus{0, 1, 2, 3, 0, 1};
  std::ostringstream log;
  TrainOptions opts;
  opts.steps = 3;
  opts.lr = 0.25;
  opts.log = &log;
  const TrainState s = train(cfg, init_weights(cfg, 1), corpus, opts);
  CHECK(s.step == 3);
  std::istringstream lines(log.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::size_t step;
    double loss, lr;
    char tab1, tab2;
    fields >> step >> std::noskipws >> tab1 >> std::skipws >> loss >> std::noskipws >> tab2 >> std::skipws >> lr;
    CHECK(step == n);
    CHECK(tab1 == '\t');
    CHECK(tab2 == '\t');
    CHECK(lr == 0.25);
    CHECK(loss > 0.0);
    ++n;
  }
  CHECK(n == 3);
}
