// SPDX-License-Identifier: Apache-2.0
//
// Central-difference gradients over a WeightSet and plain gradient descent.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>

#include "anlm/config.hpp"
#include "anlm/vocab.hpp"
#include "anlm/weight_set.hpp"

namespace anlm {

using LossFunctional = std::function<double(const WeightSet&)>;

/// (J(w + h e_i) - J(w - h e_i)) / 2h for every scalar parameter. The result
/// has the same names and shapes as `weights`. A non-finite loss raises
/// ErrorCode::non_finite naming the parameter being probed.
WeightSet numerical_gradient(const LossFunctional& loss, const WeightSet& weights, double h = 1e-5);

struct TrainState {
  WeightSet weights;
  double lr = 0.1;
  std::size_t step = 0;
};

/// w <- w - lr * grad; returns the new state with step + 1.
TrainState gd_step(const TrainState& state, const WeightSet& gradient);

/// Mean teacher-forced loss per predicted token over the corpus. The corpus is
/// cut into chunks the model accepts, overlapping by min_context() tokens so
/// every target appears exactly once.
double mean_corpus_loss(const ModelConfig& cfg, const WeightSet& weights, std::span<const TokenId> corpus);

struct TrainOptions {
  std::size_t steps = 100;
  double lr = 0.1;
  double h = 1e-5;
  std::ostream* log = nullptr;  // "step\tloss\tmu_lr" per step when set
};

/// Runs `steps` gradient-descent steps on mean_corpus_loss.
TrainState train(const ModelConfig& cfg, WeightSet initial, std::span<const TokenId> corpus,
                 const TrainOptions& options);

}  // namespace anlm
