// SPDX-License-Identifier: Apache-2.0
#include "anlm/training.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "anlm/errors.hpp"
#include "anlm/language_model.hpp"
#include "anlm/losses.hpp"

namespace anlm {

namespace {

double checked(double value, const std::string& name, std::size_t index) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::non_finite, "loss is not finite while probing parameter " + name + "[" +
                                           std::to_string(index) + "]");
  }
  return value;
}

}  // namespace

WeightSet numerical_gradient(const LossFunctional& loss, const WeightSet& weights, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::config, "finite-difference step h must be positive");
  if (!std::isfinite(loss(weights))) throw Error(ErrorCode::non_finite, "loss is not finite at the starting weights");

  WeightSet probe = weights;
  WeightSet grad = weights;
  const double inv = 1.0 / (2.0 * h);
  auto& entries = probe.entries();
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const std::string& name = entries[e].first;
    auto& data = entries[e].second.data;
    auto& out = grad.entries()[e].second.data;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double up = checked(loss(probe), name, i);
      data[i] = saved - h;
      const double down = checked(loss(probe), name, i);
      data[i] = saved;
      out[i] = (up - down) * inv;
    }
  }
  return grad;
}

TrainState gd_step(const TrainState& state, const WeightSet& gradient) {
  if (!(state.lr > 0.0)) throw Error(ErrorCode::config, "learning rate must be positive");
  const auto& w = state.weights.entries();
  const auto& g = gradient.entries();
  if (w.size() != g.size()) {
    throw Error(ErrorCode::shape, "gradient has " + std::to_string(g.size()) + " tensors, weights have " +
                                      std::to_string(w.size()));
  }
  TrainState next{state.weights, state.lr, state.step + 1};
  for (std::size_t e = 0; e < w.size(); ++e) {
    if (w[e].first != g[e].first || w[e].second.dims != g[e].second.dims) {
      throw Error(ErrorCode::shape, "gradient tensor '" + g[e].first + "' does not match weight '" + w[e].first + "'");
    }
    auto& data = next.weights.entries()[e].second.data;
    const auto& gd = g[e].second.data;
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= state.lr * gd[i];
  }
  return next;
}

double mean_corpus_loss(const ModelConfig& cfg, const WeightSet& weights, std::span<const TokenId> corpus) {
  const auto model = make_language_model(cfg, weights);
  const std::size_t overlap = model->min_context();
  const std::size_t chunk = std::min(model->max_input(), corpus.size());
  if (chunk <= overlap) throw Error(ErrorCode::length, "corpus is too short for the model's context");
  double total = 0.0;
  std::size_t terms = 0;
  for (std::size_t start = 0; start + overlap < corpus.size(); start += chunk - overlap) {
    const auto piece = corpus.subspan(start, std::min(chunk, corpus.size() - start));
    total += ar_loss(piece, *model);
    terms += ar_target_count(piece.size(), *model);
  }
  return total / static_cast<double>(terms);
}

TrainState train(const ModelConfig& cfg, WeightSet initial, std::span<const TokenId> corpus,
                 const TrainOptions& options) {
  TrainState state{std::move(initial), options.lr, 0};
  const LossFunctional objective = [&](const WeightSet& w) { return mean_corpus_loss(cfg, w, corpus); };
  for (std::size_t s = 0; s < options.steps; ++s) {
    const double loss = objective(state.weights);
    if (options.log) *options.log << state.step << '\t' << loss << '\t' << state.lr << '\n';
    state = gd_step(state, numerical_gradient(objective, state.weights, options.h));
  }
  return state;
}

}  // namespace anlm
