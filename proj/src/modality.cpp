// SPDX-License-Identifier: Apache-2.0
#include "anlm/modality.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "anlm/errors.hpp"
#include "anlm/rng.hpp"
#include "binary_io.hpp"

namespace anlm {

ImageTensor::ImageTensor(std::size_t h, std::size_t w, std::size_t c)
    : height(h), width(w), channels(c), data(h * w * c, 0.0) {}

namespace {

void check_geometry(std::size_t height, std::size_t width, std::size_t channels, std::size_t patch) {
  if (patch == 0 || channels == 0 || height == 0 || width == 0) {
    throw Error(ErrorCode::shape, "image and patch dimensions must be positive");
  }
  if (height % patch != 0 || width % patch != 0) {
    throw Error(ErrorCode::shape, "patch size " + std::to_string(patch) + " does not divide image " +
                                      std::to_string(height) + "x" + std::to_string(width));
  }
}

}  // namespace

Matrix patchify(const ImageTensor& img, std::size_t patch) {
  check_geometry(img.height, img.width, img.channels, patch);
  if (img.data.size() != img.height * img.width * img.channels) {
    throw Error(ErrorCode::shape, "image data does not match its dimensions");
  }
  const std::size_t across = img.width / patch;
  const std::size_t count = (img.height / patch) * across;
  Matrix out(patch * patch * img.channels, count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t row0 = (k / across) * patch;
    const std::size_t col0 = (k % across) * patch;
    std::size_t r = 0;
    for (std::size_t dy = 0; dy < patch; ++dy)
      for (std::size_t dx = 0; dx < patch; ++dx)
        for (std::size_t ch = 0; ch < img.channels; ++ch) out(r++, k) = img.at(row0 + dy, col0 + dx, ch);
  }
  return out;
}

ImageTensor unpatchify(const Matrix& patches, std::size_t height, std::size_t width, std::size_t channels,
                       std::size_t patch) {
  check_geometry(height, width, channels, patch);
  const std::size_t across = width / patch;
  const std::size_t count = (height / patch) * across;
  if (patches.rows() != patch * patch * channels || patches.cols() != count) {
    throw Error(ErrorCode::shape, "patch matrix " + patches.shape_string() + " does not fit the image geometry");
  }
  ImageTensor img(height, width, channels);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t row0 = (k / across) * patch;
    const std::size_t col0 = (k % across) * patch;
    std::size_t r = 0;
    for (std::size_t dy = 0; dy < patch; ++dy)
      for (std::size_t dx = 0; dx < patch; ++dx)
        for (std::size_t ch = 0; ch < channels; ++ch) img.at(row0 + dy, col0 + dx, ch) = patches(r++, k);
  }
  return img;
}

Matrix patch_embed(const Matrix& patches, const Matrix& embedding) {
  if (embedding.cols() != patches.rows()) {
    throw Error(ErrorCode::shape, "patch embedding " + embedding.shape_string() + " vs patches " +
                                      patches.shape_string());
  }
  return matmul(embedding, patches);
}

Matrix tst_embed(const SeriesTensor& series, const Matrix& embedding, const Vector& bias) {
  if (embedding.cols() != series.rows() || bias.size() != embedding.rows()) {
    throw Error(ErrorCode::shape, "series " + series.shape_string() + ", embedding " + embedding.shape_string() +
                                      ", bias (" + std::to_string(bias.size()) + ")");
  }
  const std::size_t channels = series.rows();
  Matrix z(channels, series.cols());
  for (std::size_t i = 0; i < series.cols(); ++i) {
    double mean = 0.0;
    for (std::size_t c = 0; c < channels; ++c) mean += series(c, i);
    mean /= static_cast<double>(channels);
    double var = 0.0;
    for (std::size_t c = 0; c < channels; ++c) var += (series(c, i) - mean) * (series(c, i) - mean);
    var /= static_cast<double>(channels);
    const double inv = 1.0 / std::sqrt(var + kSeriesZScoreEps);
    for (std::size_t c = 0; c < channels; ++c) z(c, i) = (series(c, i) - mean) * inv;
  }
  return add_column_bias(matmul(embedding, z), bias);
}

Matrix tst_noise_mask(std::size_t channels, std::size_t steps, const MaskingOptions& opts, std::uint64_t seed) {
  const double r = opts.rate;
  const double lm = opts.mean_length;
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::config, "masking rate must lie in (0, 1)");
  if (!(lm >= 1.0)) throw Error(ErrorCode::config, "mean masked length must be at least 1");
  const double unmasked_mean = lm * (1.0 - r) / r;
  if (!(unmasked_mean >= 1.0)) {
    throw Error(ErrorCode::config, "rate and mean length imply unmasked runs shorter than one step");
  }
  const double leave_masked = 1.0 / lm;
  const double leave_unmasked = 1.0 / unmasked_mean;

  Matrix mask(channels, steps);
  for (std::size_t c = 0; c < channels; ++c) {
    SplitMix64 rng(derive_seed(seed, c));
    bool masked = rng.uniform01() < r;
    for (std::size_t t = 0; t < steps; ++t) {
      mask(c, t) = masked ? 1.0 : 0.0;
      if (rng.uniform01() < (masked ? leave_masked : leave_unmasked)) masked = !masked;
    }
  }
  return mask;
}

MaskedSeries tst_mask(const SeriesTensor& series, const MaskingOptions& opts, std::uint64_t seed) {
  MaskedSeries out{series, tst_noise_mask(series.rows(), series.cols(), opts, seed)};
  for (std::size_t c = 0; c < series.rows(); ++c)
    for (std::size_t t = 0; t < series.cols(); ++t)
      if (out.mask(c, t) != 0.0) out.corrupted(c, t) = 0.0;
  return out;
}

ImageTensor read_image(std::istream& in) {
  const auto h = binary::get_uint<std::uint32_t>(in, "image height");
  const auto w = binary::get_uint<std::uint32_t>(in, "image width");
  const auto c = binary::get_uint<std::uint32_t>(in, "image channels");
  ImageTensor img(h, w, c);
  for (auto& v : img.data) v = binary::get_f32(in, "image pixels");
  return img;
}

void write_image(std::ostream& out, const ImageTensor& img) {
  binary::put_uint(out, static_cast<std::uint32_t>(img.height));
  binary::put_uint(out, static_cast<std::uint32_t>(img.width));
  binary::put_uint(out, static_cast<std::uint32_t>(img.channels));
  for (double v : img.data) binary::put_f32(out, static_cast<float>(v));
}

SeriesTensor read_series(std::istream& in) {
  const auto c = binary::get_uint<std::uint32_t>(in, "series channels");
  const auto n = binary::get_uint<std::uint32_t>(in, "series length");
  SeriesTensor s(c, n);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t t = 0; t < n; ++t) s(i, t) = binary::get_f32(in, "series values");
  return s;
}

void write_series(std::ostream& out, const SeriesTensor& series) {
  binary::put_uint(out, static_cast<std::uint32_t>(series.rows()));
  binary::put_uint(out, static_cast<std::uint32_t>(series.cols()));
  for (std::size_t i = 0; i < series.rows(); ++i)
    for (std::size_t t = 0; t < series.cols(); ++t) binary::put_f32(out, static_cast<float>(series(i, t)));
}

}  // namespace anlm
