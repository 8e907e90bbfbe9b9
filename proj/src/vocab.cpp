// SPDX-License-Identifier: Apache-2.0
#include "anlm/vocab.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "anlm/errors.hpp"

namespace anlm {

void TokenSequence::validate() const {
  if (!segments.empty() && segments.size() != ids.size()) {
    throw Error(ErrorCode::length, "segment list length " + std::to_string(segments.size()) +
                                       " differs from sequence length " + std::to_string(ids.size()));
  }
  if (!mlm_mask.empty() && mlm_mask.size() != ids.size()) {
    throw Error(ErrorCode::length, "mask length " + std::to_string(mlm_mask.size()) +
                                       " differs from sequence length " + std::to_string(ids.size()));
  }
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, SpecialTokens specials)
    : tokens_(std::move(tokens)), specials_(specials) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw Error(ErrorCode::format, "empty token at id " + std::to_string(i));
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) throw Error(ErrorCode::format, "duplicate token '" + tokens_[i] + "' at id " + std::to_string(i));
  }
  auto resolve = [&](std::optional<TokenId>& slot, const char* literal, const char* name) {
    if (slot) {
      if (*slot >= tokens_.size()) {
        throw Error(ErrorCode::format, std::string("special ") + name + "=" + std::to_string(*slot) +
                                           " is outside the vocabulary");
      }
      return;
    }
    if (auto it = index_.find(literal); it != index_.end()) slot = it->second;
  };
  resolve(specials_.cls, "[CLS]", "CLS");
  resolve(specials_.sep, "[SEP]", "SEP");
  resolve(specials_.mask, "[MASK]", "MASK");
  resolve(specials_.unk, "[UNK]", "UNK");
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw Error(ErrorCode::out_of_range, "token id " + std::to_string(id) + " outside vocabulary of size " +
                                             std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return std::nullopt;
}

TokenId Vocabulary::id(std::string_view token) const {
  if (auto found = find(token)) return *found;
  throw Error(ErrorCode::out_of_vocabulary, "token '" + std::string(token) + "' is not in the vocabulary");
}

Vocabulary parse_vocabulary(std::istream& in) {
  std::vector<std::string> tokens;
  SpecialTokens specials;
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header && line.rfind("#special ", 0) == 0) {
      const std::string decl = line.substr(9);
      const auto eq = decl.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": malformed special declaration");
      const std::string name = decl.substr(0, eq);
      TokenId value = 0;
      try {
        value = static_cast<TokenId>(std::stoul(decl.substr(eq + 1)));
      } catch (const std::exception&) {
        throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": special " + name + " has a non-numeric id");
      }
      if (name == "CLS") specials.cls = value;
      else if (name == "SEP") specials.sep = value;
      else if (name == "MASK") specials.mask = value;
      else if (name == "UNK") specials.unk = value;
      else throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": unknown special '" + name + "'");
      continue;
    }
    header = false;
    if (line.empty()) throw Error(ErrorCode::format, "line " + std::to_string(line_no) + ": empty token");
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens), specials);
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open vocabulary file '" + path + "'");
  return parse_vocabulary(in);
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  const auto& s = vocab.specials();
  if (s.cls) out << "#special CLS=" << *s.cls << '\n';
  if (s.sep) out << "#special SEP=" << *s.sep << '\n';
  if (s.mask) out << "#special MASK=" << *s.mask << '\n';
  if (s.unk) out << "#special UNK=" << *s.unk << '\n';
  for (const auto& t : vocab.tokens()) out << t << '\n';
}

TokenSequence tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenSequence seq;
  std::istringstream words{std::string(text)};
  std::string word;
  while (words >> word) {
    if (auto id = vocab.find(word)) {
      seq.ids.push_back(*id);
    } else if (vocab.specials().unk) {
      seq.ids.push_back(*vocab.specials().unk);
    } else {
      throw Error(ErrorCode::out_of_vocabulary, "token '" + word + "' is not in the vocabulary and no [UNK] is declared");
    }
  }
  if (seq.ids.empty()) throw Error(ErrorCode::empty_sequence, "text contains no tokens");
  return seq;
}

std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += vocab.token(ids[i]);
  }
  return out;
}

Vector one_hot(std::size_t id, std::size_t size) {
  if (id >= size) {
    throw Error(ErrorCode::out_of_range, "one_hot: id " + std::to_string(id) + " outside [0, " + std::to_string(size) + ")");
  }
  Vector v(size);
  v[id] = 1.0;
  return v;
}

Matrix embed(std::span<const TokenId> ids, const Matrix& table) {
  Matrix x(table.rows(), ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table.cols()) {
      throw Error(ErrorCode::out_of_range, "embed: token id " + std::to_string(ids[i]) + " at position " +
                                               std::to_string(i) + " outside table " + table.shape_string());
    }
    for (std::size_t r = 0; r < table.rows(); ++r) x(r, i) = table(r, ids[i]);
  }
  return x;
}

Matrix add_positions(const Matrix& x, const Matrix& positions) {
  if (x.rows() != positions.rows()) throw Error(ErrorCode::shape, "add_positions: " + x.shape_string() + " vs " + positions.shape_string());
  if (x.cols() > positions.cols()) {
    throw Error(ErrorCode::length, "sequence length " + std::to_string(x.cols()) + " exceeds maximum length " +
                                       std::to_string(positions.cols()));
  }
  return add(x, positions.left_columns(x.cols()));
}

Matrix add_positions(const Matrix& x, const Matrix& positions, const Matrix& segments) {
  return add(add_positions(x, positions), segments);
}

Matrix segment_matrix(std::span<const Segment> segments, const Vector& seg_a, const Vector& seg_b) {
  if (seg_a.size() != seg_b.size()) throw Error(ErrorCode::shape, "segment vectors differ in dimension");
  Matrix m(seg_a.size(), segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) m.set_column(i, segments[i] == Segment::A ? seg_a : seg_b);
  return m;
}

Vector tied_logits(const Vector& h, const Matrix& table) {
  if (h.size() != table.rows()) {
    throw Error(ErrorCode::shape, "tied_logits: hidden dim " + std::to_string(h.size()) + " vs table " + table.shape_string());
  }
  Vector z(table.cols());
  for (std::size_t j = 0; j < table.cols(); ++j) {
    double s = 0.0;
    for (std::size_t r = 0; r < table.rows(); ++r) s += table(r, j) * h[r];
    z[j] = s;
  }
  return z;
}

Vector tied_logits(const Vector& h, const Matrix& table, const Vector& output_bias) {
  if (output_bias.size() != table.cols()) {
    throw Error(ErrorCode::shape, "tied_logits: bias length " + std::to_string(output_bias.size()) +
                                      " vs vocabulary size " + std::to_string(table.cols()));
  }
  return add(tied_logits(h, table), output_bias);
}

}  // namespace anlm
