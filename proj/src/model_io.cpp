// SPDX-License-Identifier: Apache-2.0
#include "anlm/model_io.hpp"

#include <array>
#include <fstream>
#include <limits>

#include "anlm/errors.hpp"
#include "anlm/rng.hpp"
#include "binary_io.hpp"

namespace anlm {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'N', 'L', 'M'};
// Guards against absurd lengths in corrupted headers before allocating.
constexpr std::uint64_t kMaxNameLength = 1u << 16;
constexpr std::uint64_t kMaxRank = 16;

}  // namespace

void write_weights(std::ostream& out, const WeightSet& ws, std::uint64_t generator_id) {
  out.write(kMagic.data(), kMagic.size());
  binary::put_uint<std::uint64_t>(out, kArchiveVersion);
  binary::put_uint<std::uint64_t>(out, generator_id);
  binary::put_uint<std::uint64_t>(out, ws.tensor_count());
  for (const auto& [name, tensor] : ws.entries()) {
    binary::put_uint<std::uint64_t>(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    binary::put_uint<std::uint64_t>(out, tensor.dims.size());
    for (auto d : tensor.dims) binary::put_uint<std::uint64_t>(out, d);
    for (double v : tensor.data) binary::put_f64(out, v);
  }
  if (!out) throw Error(ErrorCode::io, "failed writing tensor archive");
}

void write_weights(std::ostream& out, const WeightSet& ws) { write_weights(out, ws, SplitMix64::kAlgorithmId); }

WeightSet read_weights(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) throw Error(ErrorCode::truncated, "archive shorter than its magic");
  if (magic != kMagic) throw Error(ErrorCode::bad_magic, "not a tensor archive (bad magic)");
  const auto version = binary::get_uint<std::uint64_t>(in, "archive version");
  if (version != kArchiveVersion) {
    throw Error(ErrorCode::version_mismatch, "archive version " + std::to_string(version) + ", expected " +
                                                 std::to_string(kArchiveVersion));
  }
  binary::get_uint<std::uint64_t>(in, "generator id");
  const auto count = binary::get_uint<std::uint64_t>(in, "tensor count");

  WeightSet ws;
  for (std::uint64_t t = 0; t < count; ++t) {
    const auto name_len = binary::get_uint<std::uint64_t>(in, "tensor name length");
    if (name_len > kMaxNameLength) throw Error(ErrorCode::format, "tensor name length " + std::to_string(name_len));
    std::string name(name_len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(name_len))) {
      throw Error(ErrorCode::truncated, "unexpected end of data reading a tensor name");
    }
    if (ws.contains(name)) throw Error(ErrorCode::duplicate_name, "archive repeats tensor '" + name + "'");
    const auto rank = binary::get_uint<std::uint64_t>(in, "rank of '" + name + "'");
    if (rank > kMaxRank) throw Error(ErrorCode::format, "tensor '" + name + "' has rank " + std::to_string(rank));
    Tensor tensor;
    std::uint64_t elements = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      const auto d = binary::get_uint<std::uint64_t>(in, "dims of '" + name + "'");
      if (d != 0 && elements > std::numeric_limits<std::uint64_t>::max() / 8 / d) {
        throw Error(ErrorCode::format, "tensor '" + name + "' is implausibly large");
      }
      elements *= d;
      tensor.dims.push_back(d);
    }
    tensor.data.reserve(std::min<std::uint64_t>(elements, 1u << 20));
    for (std::uint64_t i = 0; i < elements; ++i) tensor.data.push_back(binary::get_f64(in, "payload of '" + name + "'"));
    ws.add(std::move(name), std::move(tensor));
  }
  return ws;
}

void save_weights(const WeightSet& ws, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  write_weights(out, ws);
}

WeightSet load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open weights file '" + path + "'");
  return read_weights(in);
}

namespace {

void add_block_layout(std::vector<TensorSpec>& out, std::size_t l, const ModelConfig& c) {
  const std::string p = "blk" + std::to_string(l) + ".";
  for (std::size_t m = 1; m <= c.heads; ++m) {
    const std::string h = p + "h" + std::to_string(m) + ".";
    out.push_back({h + "WQ", {c.d_e, c.d_k}});
    out.push_back({h + "WK", {c.d_e, c.d_k}});
    out.push_back({h + "WV", {c.d_e, c.d_v}});
    if (c.attention_bias) {
      out.push_back({h + "bQ", {c.d_k}});
      out.push_back({h + "bK", {c.d_k}});
      out.push_back({h + "bV", {c.d_v}});
    }
  }
  out.push_back({p + "WO", {c.heads * c.d_v, c.d_e}});
  if (c.attention_bias) out.push_back({p + "bO", {c.d_e}});
  out.push_back({p + "ln1G", {c.d_e}});
  out.push_back({p + "ln1B", {c.d_e}});
  out.push_back({p + "ffn.W1", {c.d_f, c.d_e}});
  out.push_back({p + "ffn.b1", {c.d_f}});
  out.push_back({p + "ffn.W2", {c.d_e, c.d_f}});
  out.push_back({p + "ffn.b2", {c.d_e}});
  out.push_back({p + "ln2G", {c.d_e}});
  out.push_back({p + "ln2B", {c.d_e}});
}

}  // namespace

std::vector<TensorSpec> weight_layout(const ModelConfig& c) {
  c.validate();
  std::vector<TensorSpec> out;
  const std::uint64_t d = c.d_e;
  switch (c.arch) {
    case Arch::ffnn: {
      out.push_back({"ffnn.E", {d, c.vocab_size}});
      std::uint64_t in = c.max_len * d;
      for (std::size_t l = 0; l < c.hidden.size(); ++l) {
        const std::string k = std::to_string(l + 1);
        out.push_back({"ffnn.W" + k, {c.hidden[l], in}});
        out.push_back({"ffnn.b" + k, {c.hidden[l]}});
        in = c.hidden[l];
      }
      out.push_back({"ffnn.U", {c.vocab_size, in}});
      break;
    }
    case Arch::rnn:
      out.push_back({"emb.E", {d, c.vocab_size}});
      for (std::size_t l = 1; l <= c.layers; ++l) {
        const std::string p = "rnn.l" + std::to_string(l) + ".";
        out.push_back({p + "W", {d, d}});
        out.push_back({p + "U", {d, d}});
        out.push_back({p + "b", {d}});
      }
      break;
    case Arch::lstm:
      out.push_back({"emb.E", {d, c.vocab_size}});
      for (std::size_t l = 1; l <= c.layers; ++l) {
        const std::string p = "lstm.l" + std::to_string(l) + ".";
        for (const char* gate : {"Q", "P", "R", "S"}) {
          out.push_back({p + "U" + gate, {d, d}});
          out.push_back({p + "W" + gate, {d, d}});
          out.push_back({p + "b" + gate, {d}});
        }
      }
      break;
    case Arch::gpt2:
      out.push_back({"emb.E", {d, c.vocab_size}});
      out.push_back({"emb.pos", {d, c.max_len}});
      out.push_back({"emb.lnG", {d}});
      out.push_back({"emb.lnB", {d}});
      for (std::size_t l = 1; l <= c.layers; ++l) add_block_layout(out, l, c);
      break;
    case Arch::bert:
      out.push_back({"emb.E", {d, c.vocab_size}});
      out.push_back({"emb.pos", {d, c.max_len}});
      out.push_back({"emb.segA", {d}});
      out.push_back({"emb.segB", {d}});
      out.push_back({"emb.lnG", {d}});
      out.push_back({"emb.lnB", {d}});
      for (std::size_t l = 1; l <= c.layers; ++l) add_block_layout(out, l, c);
      out.push_back({"pool.W", {d, d}});
      out.push_back({"pool.b", {d}});
      out.push_back({"mlm.W", {d, d}});
      out.push_back({"mlm.b", {d}});
      out.push_back({"mlm.lnG", {d}});
      out.push_back({"mlm.lnB", {d}});
      out.push_back({"mlm.outB", {c.vocab_size}});
      out.push_back({"nsp.W", {2, d}});
      out.push_back({"nsp.b", {2}});
      break;
  }
  return out;
}

WeightSet init_weights(const ModelConfig& cfg, std::uint64_t seed) {
  SplitMix64 rng(seed);
  WeightSet ws;
  for (auto& spec : weight_layout(cfg)) {
    Tensor t;
    t.dims = spec.dims;
    t.data.resize(t.element_count());
    for (auto& v : t.data) {
      do v = rng.uniform(-kInitRange, kInitRange);
      while (v == -kInitRange);
    }
    ws.add(std::move(spec.name), std::move(t));
  }
  return ws;
}

}  // namespace anlm
