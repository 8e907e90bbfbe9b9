// SPDX-License-Identifier: Apache-2.0
// Little-endian scalar encoding shared by the binary readers and writers.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "anlm/errors.hpp"

namespace anlm::binary {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xFF));
    return out;
  }
}

template <typename U>
void put_uint(std::ostream& out, U v) {
  v = to_little(v);
  char bytes[sizeof(U)];
  std::memcpy(bytes, &v, sizeof(U));
  out.write(bytes, sizeof(U));
}

template <typename U>
U get_uint(std::istream& in, const std::string& what) {
  char bytes[sizeof(U)];
  if (!in.read(bytes, sizeof(U))) throw Error(ErrorCode::truncated, "unexpected end of data reading " + what);
  U v;
  std::memcpy(&v, bytes, sizeof(U));
  return to_little(v);
}

inline void put_f64(std::ostream& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& in, const std::string& what) {
  return std::bit_cast<double>(get_uint<std::uint64_t>(in, what));
}

inline void put_f32(std::ostream& out, float v) { put_uint(out, std::bit_cast<std::uint32_t>(v)); }
inline float get_f32(std::istream& in, const std::string& what) {
  return std::bit_cast<float>(get_uint<std::uint32_t>(in, what));
}

}  // namespace anlm::binary
