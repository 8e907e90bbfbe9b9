// SPDX-License-Identifier: Apache-2.0
//
// Hyperparameter record shared by every architecture, and its key=value
// text form:
//
//   arch=gpt2
//   d_e=768
//   ...
//
// Blank lines and lines starting with '#' are ignored. Unknown keys, keys that
// do not apply to the declared arch, and missing required keys are rejected.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "anlm/tensor.hpp"

namespace anlm {

enum class Arch { ffnn, rnn, lstm, gpt2, bert };
enum class NormVariant { post, pre };

std::string_view to_string(Arch arch);
std::string_view to_string(NormVariant v);
std::string_view to_string(GeluMode m);
std::string_view to_string(Activation a);

struct ModelConfig {
  Arch arch = Arch::gpt2;
  std::size_t d_e = 0;         // embedding / model dimension (d_0 for ffnn)
  std::size_t d_k = 0;         // query/key dimension
  std::size_t d_v = 0;         // value dimension
  std::size_t d_f = 0;         // feedforward inner dimension
  std::size_t heads = 0;       // M
  std::size_t layers = 0;      // L
  std::size_t vocab_size = 0;  // |V|
  std::size_t max_len = 0;     // n (context width for ffnn, unroll cap for rnn/lstm)
  bool attention_bias = true;  // zeta
  NormVariant norm = NormVariant::pre;
  GeluMode gelu = GeluMode::tanh_approx;
  double ln_eps = kLayerNormEps;
  std::vector<std::size_t> hidden;  // ffnn layer widths d_1..d_L
  Activation activation = Activation::sigmoid;

  /// Throws ErrorCode::config naming the first offending field.
  void validate() const;
};

/// Convenience constructors with the per-arch defaults applied.
ModelConfig gpt2_config(std::size_t d_e, std::size_t layers, std::size_t heads, std::size_t d_k,
                        std::size_t d_v, std::size_t d_f, std::size_t vocab, std::size_t max_len,
                        bool zeta = true);
ModelConfig bert_config(std::size_t d_e, std::size_t layers, std::size_t heads, std::size_t d_k,
                        std::size_t d_v, std::size_t d_f, std::size_t vocab, std::size_t max_len,
                        bool zeta = true);
ModelConfig recurrent_config(Arch arch, std::size_t d_e, std::size_t layers, std::size_t vocab,
                             std::size_t max_len);
ModelConfig ffnn_config(std::size_t context, std::size_t d0, std::vector<std::size_t> hidden,
                        std::size_t vocab, Activation act = Activation::sigmoid);

ModelConfig parse_config(std::istream& in);
ModelConfig parse_config_text(std::string_view text);
ModelConfig load_config(const std::string& path);
std::string format_config(const ModelConfig& cfg);

}  // namespace anlm
