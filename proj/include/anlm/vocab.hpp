// SPDX-License-Identifier: Apache-2.0
//
// Vocabulary, token sequences, and the input/output embedding operations.
// Token ids are 0-based everywhere in this library.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "anlm/tensor.hpp"

namespace anlm {

using TokenId = std::uint32_t;

enum class Segment : std::uint8_t { A, B };

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<Segment> segments;  // empty or parallel to ids
  std::vector<bool> mlm_mask;     // empty or parallel to ids

  std::size_t size() const noexcept { return ids.size(); }
  /// Throws when a parallel list has the wrong length.
  void validate() const;
};

struct SpecialTokens {
  std::optional<TokenId> cls;
  std::optional<TokenId> sep;
  std::optional<TokenId> mask;
  std::optional<TokenId> unk;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Tokens must be unique. Specials not given explicitly are detected from
  /// the literal forms "[CLS]", "[SEP]", "[MASK]" and "[UNK]".
  explicit Vocabulary(std::vector<std::string> tokens, SpecialTokens specials = {});

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  TokenId id(std::string_view token) const;  // throws out_of_vocabulary
  const SpecialTokens& specials() const noexcept { return specials_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  SpecialTokens specials_;
};

/// Vocabulary file: one token per line, the 0-based line number among token
/// lines is the id. Leading lines of the form "#special CLS=<id>" declare
/// special tokens (CLS, SEP, MASK, UNK).
Vocabulary parse_vocabulary(std::istream& in);
Vocabulary load_vocabulary(const std::string& path);
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);

/// Whitespace tokenisation against a fixed vocabulary. Unknown words map to
/// [UNK] when the vocabulary declares one.
TokenSequence tokenize(std::string_view text, const Vocabulary& vocab);
std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab);

Vector one_hot(std::size_t id, std::size_t size);

/// X = E * Omega: column i is column ids[i] of the d_e x |V| table E.
Matrix embed(std::span<const TokenId> ids, const Matrix& table);

/// Column-wise X + positions[:, 0..len).
Matrix add_positions(const Matrix& x, const Matrix& positions);
/// Column-wise X + positions[:, 0..len) + segments.
Matrix add_positions(const Matrix& x, const Matrix& positions, const Matrix& segments);

/// Expands the two segment vectors to a d_e x len matrix.
Matrix segment_matrix(std::span<const Segment> segments, const Vector& seg_a, const Vector& seg_b);

/// z = E^T h, optionally plus an output bias of length |V|.
Vector tied_logits(const Vector& h, const Matrix& table);
Vector tied_logits(const Vector& h, const Matrix& table, const Vector& output_bias);

}  // namespace anlm
