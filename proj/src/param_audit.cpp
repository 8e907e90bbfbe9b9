// SPDX-License-Identifier: Apache-2.0
#include "anlm/param_audit.hpp"

#include <algorithm>
#include <sstream>

#include "anlm/errors.hpp"

namespace anlm {

namespace {

void expect_arch(const ModelConfig& cfg, Arch arch) {
  if (cfg.arch != arch) {
    throw Error(ErrorCode::config, "arch: expected " + std::string(to_string(arch)) + ", got " +
                                       std::string(to_string(cfg.arch)));
  }
  cfg.validate();
}

Count find(const std::vector<std::pair<std::string, Count>>& rows, const std::string& name) {
  for (const auto& [key, value] : rows)
    if (key == name) return value;
  throw Error(ErrorCode::missing_tensor, "report has no row '" + name + "'");
}

void finish(CountReport& r) {
  r.total = 0;
  for (const auto& row : r.subtotals) r.total += row.second;
}

}  // namespace

Count CountReport::subtotal(const std::string& name) const { return find(subtotals, name); }
Count CountReport::detail(const std::string& name) const { return find(details, name); }

Count attention_block_count(const ModelConfig& c) {
  const Count zeta = c.attention_bias ? 1 : 0;
  return 2 * c.heads * c.d_e * (c.d_k + c.d_v) + zeta * (c.heads * (2 * c.d_k + c.d_v) + c.d_e);
}

Count transformer_block_count(const ModelConfig& c) {
  const Count ffn = 2 * c.d_e * c.d_f + c.d_e + c.d_f;
  return attention_block_count(c) + ffn + 2 * c.d_e + 2 * c.d_e;
}

CountReport count_gpt2(const ModelConfig& cfg) {
  expect_arch(cfg, Arch::gpt2);
  CountReport r;
  r.config = cfg;
  const Count d = cfg.d_e;
  r.subtotals = {{"embedding", d * cfg.vocab_size},
                 {"positional_encoding", d * cfg.max_len},
                 {"embedding_layer_norm", 2 * d},
                 {"transformer", cfg.layers * transformer_block_count(cfg)}};
  r.details = {{"block_attention", attention_block_count(cfg)},
               {"block_feedforward", 2 * d * cfg.d_f + d + cfg.d_f},
               {"block_layer_norm_1", 2 * d},
               {"block_layer_norm_2", 2 * d},
               {"block", transformer_block_count(cfg)},
               {"tied_output", 0}};
  finish(r);
  return r;
}

CountReport count_bert(const ModelConfig& cfg, bool include_mlm, bool include_nsp) {
  expect_arch(cfg, Arch::bert);
  CountReport r;
  r.config = cfg;
  const Count d = cfg.d_e;
  r.subtotals = {{"embedding", d * cfg.vocab_size},
                 {"positional_encoding", d * cfg.max_len},
                 {"segment_encoding", 2 * d},
                 {"embedding_layer_norm", 2 * d},
                 {"transformer", cfg.layers * transformer_block_count(cfg)},
                 {"pooler", d * (d + 1)}};
  Count backbone = 0;
  for (const auto& row : r.subtotals) backbone += row.second;
  const Count mlm = d * (d + 3) + cfg.vocab_size;
  const Count nsp = 2 * (d + 1);
  if (include_mlm) {
    r.subtotals.emplace_back("mlm_dense", d * (d + 1));
    r.subtotals.emplace_back("mlm_layer_norm", 2 * d);
    r.subtotals.emplace_back("mlm_output_bias", cfg.vocab_size);
  }
  if (include_nsp) r.subtotals.emplace_back("nsp_head", nsp);
  r.details = {{"backbone", backbone},
               {"mlm_head", mlm},
               {"nsp_head", nsp},
               {"block", transformer_block_count(cfg)},
               {"tied_output", 0}};
  finish(r);
  return r;
}

CountReport count_rnn(const ModelConfig& cfg) {
  expect_arch(cfg, Arch::rnn);
  CountReport r;
  r.config = cfg;
  const Count d = cfg.d_e;
  const Count per_layer = 2 * d * d + d;
  r.subtotals = {{"embedding", d * cfg.vocab_size}, {"recurrent_layers", cfg.layers * per_layer}};
  r.details = {{"per_layer", per_layer}, {"tied_output", 0}};
  finish(r);
  return r;
}

CountReport count_lstm(const ModelConfig& cfg) {
  expect_arch(cfg, Arch::lstm);
  CountReport r;
  r.config = cfg;
  const Count d = cfg.d_e;
  const Count per_layer = 4 * d * (2 * d + 1);
  r.subtotals = {{"embedding", d * cfg.vocab_size}, {"recurrent_layers", cfg.layers * per_layer}};
  r.details = {{"per_layer", per_layer}, {"tied_output", 0}};
  finish(r);
  return r;
}

CountReport count_ffnn(const ModelConfig& cfg) {
  expect_arch(cfg, Arch::ffnn);
  CountReport r;
  r.config = cfg;
  const Count d0 = cfg.d_e;
  r.subtotals.emplace_back("embedding", d0 * cfg.vocab_size);
  Count in = cfg.max_len * d0;
  for (std::size_t l = 0; l < cfg.hidden.size(); ++l) {
    const Count out = cfg.hidden[l];
    r.subtotals.emplace_back("layer_" + std::to_string(l + 1), out * (in + 1));
    in = out;
  }
  r.subtotals.emplace_back("output", cfg.vocab_size * in);
  finish(r);
  return r;
}

CountReport count_params(const ModelConfig& cfg, bool include_mlm, bool include_nsp) {
  switch (cfg.arch) {
    case Arch::gpt2: return count_gpt2(cfg);
    case Arch::bert: return count_bert(cfg, include_mlm, include_nsp);
    case Arch::rnn: return count_rnn(cfg);
    case Arch::lstm: return count_lstm(cfg);
    case Arch::ffnn: return count_ffnn(cfg);
  }
  throw Error(ErrorCode::config, "unknown arch");
}

Count enumerate_weights(const WeightSet& ws) {
  Count n = 0;
  for (const auto& entry : ws.entries()) n += entry.second.element_count();
  return n;
}

std::string format_report_table(const CountReport& r) {
  std::size_t width = 5;
  for (const auto& row : r.subtotals) width = std::max(width, row.first.size());
  for (const auto& row : r.details) width = std::max(width, row.first.size());
  std::ostringstream out;
  auto line = [&](const std::string& name, Count value) {
    out << name << std::string(width - name.size() + 2, ' ') << value << '\n';
  };
  out << "arch: " << to_string(r.config.arch) << '\n';
  for (const auto& [name, value] : r.subtotals) line(name, value);
  out << std::string(width + 2, '-') << '\n';
  line("total", r.total);
  if (!r.details.empty()) {
    out << '\n';
    for (const auto& [name, value] : r.details) line(name, value);
  }
  return out.str();
}

std::string format_report_kv(const CountReport& r) {
  std::ostringstream out;
  out << "arch=" << to_string(r.config.arch) << '\n';
  for (const auto& [name, value] : r.subtotals) out << name << '=' << value << '\n';
  for (const auto& [name, value] : r.details) out << "detail." << name << '=' << value << '\n';
  out << "total=" << r.total << '\n';
  return out.str();
}

}  // namespace anlm
