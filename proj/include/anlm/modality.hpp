// SPDX-License-Identifier: Apache-2.0
//
// Turning images and multivariate time series into d x n token matrices:
// patchification and patch embedding for images, z-scored projection and
// channel-wise run-length masking for series.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "anlm/tensor.hpp"

namespace anlm {

/// H x W x C image stored row-major as (row, col, channel).
struct ImageTensor {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  ImageTensor() = default;
  ImageTensor(std::size_t h, std::size_t w, std::size_t c);
  double& at(std::size_t row, std::size_t col, std::size_t ch) { return data[(row * width + col) * channels + ch]; }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data[(row * width + col) * channels + ch];
  }
};

/// C x n: one channel per row, one time step per column.
using SeriesTensor = Matrix;

/// P^2 C x (HW / P^2). Patches are taken in row-major patch order; inside a
/// patch pixels are row-major with channels innermost.
Matrix patchify(const ImageTensor& img, std::size_t patch);

/// Inverse of patchify for the given image geometry.
ImageTensor unpatchify(const Matrix& patches, std::size_t height, std::size_t width, std::size_t channels,
                       std::size_t patch);

/// X = E * patches.
Matrix patch_embed(const Matrix& patches, const Matrix& embedding);

constexpr double kSeriesZScoreEps = 1e-8;

/// Each column z-scored over its channels, then x_i = E w_i + b.
Matrix tst_embed(const SeriesTensor& series, const Matrix& embedding, const Vector& bias);

struct MaskingOptions {
  double rate = 0.15;       // r: expected masked fraction
  double mean_length = 3;   // l_m: mean masked run length
};

/// C x n matrix of {0, 1}, 1 where masked. Each channel is an independent
/// two-state chain: masked runs have geometric length with mean l_m, unmasked
/// runs mean l_m (1 - r) / r; the first step is masked with probability r.
Matrix tst_noise_mask(std::size_t channels, std::size_t steps, const MaskingOptions& opts, std::uint64_t seed);

struct MaskedSeries {
  SeriesTensor corrupted;  // masked entries are 0
  Matrix mask;
};

MaskedSeries tst_mask(const SeriesTensor& series, const MaskingOptions& opts, std::uint64_t seed);

/// Binary form: three (image) or two (series) u32 little-endian dims followed
/// by binary32 little-endian values in storage order. Image dims are
/// (H, W, C); series dims are (C, n).
ImageTensor read_image(std::istream& in);
void write_image(std::ostream& out, const ImageTensor& img);
SeriesTensor read_series(std::istream& in);
void write_series(std::ostream& out, const SeriesTensor& series);

}  // namespace anlm
