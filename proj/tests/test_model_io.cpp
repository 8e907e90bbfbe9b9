// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

#include "anlm/model_io.hpp"
#include "anlm/param_audit.hpp"
#include "anlm/rng.hpp"
#include "doctest.h"
#include "support/check.hpp"
#include "support/gen.hpp"

using namespace anlm;
using anlm::testgen::Gen;

namespace {

void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& s, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
  return v;
}

WeightSet random_set(Gen& g) {
  WeightSet ws;
  const std::size_t count = g.integer(0, 6);
  for (std::size_t t = 0; t < count; ++t) {
    Tensor tensor;
    const std::size_t rank = g.integer(0, 3);
    for (std::size_t r = 0; r < rank; ++r) tensor.dims.push_back(g.integer(0, 4));
    tensor.data.resize(tensor.element_count());
    for (double& v : tensor.data) {
      switch (g.integer(0, 9)) {
        case 0: v = -0.0; break;
        case 1: v = std::numeric_limits<double>::infinity(); break;
        case 2: v = std::numeric_limits<double>::denorm_min(); break;
        case 3: v = std::bit_cast<double>(0x7ff8dead0000beefULL); break;  // NaN with a payload
        default: v = g.real(-1e6, 1e6);
      }
    }
    std::string name = "t" + std::to_string(t) + (g.coin() ? ".x" : "/\xc3\xa9");
    ws.add(std::move(name), std::move(tensor));
  }
  return ws;
}

std::string archive_of(const WeightSet& ws) {
  std::ostringstream out;
  write_weights(out, ws);
  return out.str();
}

}  // namespace

TEST_CASE("archive layout") {
  WeightSet ws;
  ws.add("ab", Matrix::from_rows({{1.5, -2.0}}));
  const std::string a = archive_of(ws);
  CHECK(a.substr(0, 4) == "ANLM");
  CHECK(get_u64(a, 4) == kArchiveVersion);
  CHECK(get_u64(a, 12) == SplitMix64::kAlgorithmId);
  CHECK(get_u64(a, 20) == 1);
  CHECK(get_u64(a, 28) == 2);
  CHECK(a.substr(36, 2) == "ab");
  CHECK(get_u64(a, 38) == 2);
  CHECK(get_u64(a, 46) == 1);
  CHECK(get_u64(a, 54) == 2);
  CHECK(get_u64(a, 62) == std::bit_cast<std::uint64_t>(1.5));
  CHECK(get_u64(a, 70) == std::bit_cast<std::uint64_t>(-2.0));
  CHECK(a.size() == 78);
}

TEST_CASE("random weight sets round-trip bit for bit") {
  Gen g(1);
  for (int t = 0; t < 100; ++t) {
    const WeightSet ws = random_set(g);
    std::istringstream in(archive_of(ws));
    const WeightSet back = read_weights(in);
    CHECK(bitwise_equal(back, ws));
  }
}

TEST_CASE("model weights round-trip through files") {
  const ModelConfig cfg = gpt2_config(8, 2, 2, 4, 4, 16, 11, 6);
  const WeightSet ws = testgen::random_weights(cfg, 3);
  const std::string path = (std::filesystem::temp_directory_path() / "anlm_test_weights.bin").string();
  save_weights(ws, path);
  CHECK(bitwise_equal(load_weights(path), ws));
  std::remove(path.c_str());
  CHECK_ERROR_CODE(load_weights(path), ErrorCode::io);
  CHECK_ERROR_CODE(save_weights(ws, "/nonexistent-dir/x.bin"), ErrorCode::io);
}

TEST_CASE("corrupted archives raise distinct errors") {
  Gen g(2);
  WeightSet ws;
  ws.add("a", g.matrix(2, 3));
  ws.add("b", g.vector(4));
  const std::string good = archive_of(ws);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  std::istringstream m(bad_magic);
  CHECK_ERROR_CODE(read_weights(m), ErrorCode::bad_magic);

  std::string bad_version = good;
  bad_version[4] = 2;
  std::istringstream v(bad_version);
  CHECK_ERROR_CODE(read_weights(v), ErrorCode::version_mismatch);

  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    std::istringstream in(good.substr(0, cut));
    CHECK_ERROR_CODE(read_weights(in), ErrorCode::truncated);
  }

  std::string dup = "ANLM";
  put_u64(dup, 1);
  put_u64(dup, 1);
  put_u64(dup, 2);
  for (int i = 0; i < 2; ++i) {
    put_u64(dup, 1);
    dup += "w";
    put_u64(dup, 1);
    put_u64(dup, 1);
    put_u64(dup, std::bit_cast<std::uint64_t>(0.5));
  }
  std::istringstream d(dup);
  CHECK_ERROR_CODE(read_weights(d), ErrorCode::duplicate_name);

  std::string deep = "ANLM";
  put_u64(deep, 1);
  put_u64(deep, 1);
  put_u64(deep, 1);
  put_u64(deep, 1);
  deep += "w";
  put_u64(deep, 17);
  std::istringstream r(deep);
  CHECK_ERROR_CODE(read_weights(r), ErrorCode::format);
}

TEST_CASE("init_weights") {
  Gen g(3);
  for (int t = 0; t < 20; ++t) {
    const ModelConfig cfg = g.gpt2(g.coin());
    const std::uint64_t seed = g.seed();
    const WeightSet a = init_weights(cfg, seed), b = init_weights(cfg, seed);
    CHECK(archive_of(a) == archive_of(b));
    CHECK(archive_of(init_weights(cfg, seed + 1)) != archive_of(a));
    CHECK(enumerate_weights(a) == count_gpt2(cfg).total);
    for (const auto& [name, tensor] : a.entries())
      for (double x : tensor.data) {
        CHECK(x > -kInitRange);
        CHECK(x < kInitRange);
      }
  }
  ModelConfig bad = gpt2_config(4, 1, 1, 2, 2, 4, 6, 5);
  bad.d_e = 0;
  CHECK_ERROR_CODE(init_weights(bad, 1), ErrorCode::config);
}

TEST_CASE("layout matches the initialised tensors") {
  Gen g(4);
  for (const ModelConfig& cfg : {g.gpt2(true), g.bert(false), g.recurrent(Arch::lstm), g.recurrent(Arch::rnn), g.ffnn()}) {
    const auto layout = weight_layout(cfg);
    const WeightSet ws = init_weights(cfg, 1);
    REQUIRE(layout.size() == ws.tensor_count());
    for (std::size_t i = 0; i < layout.size(); ++i) {
      CHECK(layout[i].name == ws.entries()[i].first);
      CHECK(layout[i].dims == ws.entries()[i].second.dims);
    }
  }
}
