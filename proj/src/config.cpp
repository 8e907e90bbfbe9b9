// SPDX-License-Identifier: Apache-2.0
#include "anlm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "anlm/errors.hpp"

namespace anlm {

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::ffnn: return "ffnn";
    case Arch::rnn: return "rnn";
    case Arch::lstm: return "lstm";
    case Arch::gpt2: return "gpt2";
    case Arch::bert: return "bert";
  }
  return "?";
}

std::string_view to_string(NormVariant v) { return v == NormVariant::pre ? "pre" : "post"; }

std::string_view to_string(GeluMode m) { return m == GeluMode::exact ? "exact" : "tanh"; }

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    case Activation::gelu: return "gelu";
  }
  return "?";
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::config, "config field '" + field + "': " + what);
}

void require_positive(std::size_t v, const char* field) {
  if (v == 0) config_error(field, "must be positive");
}

bool is_transformer(Arch a) { return a == Arch::gpt2 || a == Arch::bert; }

std::set<std::string> allowed_keys(Arch a) {
  std::set<std::string> keys{"arch", "d_e", "vocab_size", "max_len"};
  switch (a) {
    case Arch::gpt2:
    case Arch::bert:
      keys.insert({"d_k", "d_v", "d_f", "M", "L", "zeta", "norm_variant", "gelu_mode", "ln_eps"});
      break;
    case Arch::rnn: keys.insert({"L", "activation"}); break;
    case Arch::lstm: keys.insert("L"); break;
    case Arch::ffnn: keys.insert({"hidden", "activation", "L"}); break;
  }
  return keys;
}

std::set<std::string> required_keys(Arch a) {
  std::set<std::string> keys{"arch", "d_e", "vocab_size", "max_len"};
  if (is_transformer(a)) keys.insert({"d_k", "d_v", "d_f", "M", "L"});
  if (a == Arch::rnn || a == Arch::lstm) keys.insert("L");
  if (a == Arch::ffnn) keys.insert("hidden");
  return keys;
}

std::size_t parse_size(const std::string& field, const std::string& text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) config_error(field, "expected a non-negative integer, got '" + text + "'");
  return v;
}

Activation parse_activation(const std::string& text) {
  if (text == "sigmoid") return Activation::sigmoid;
  if (text == "tanh") return Activation::tanh;
  if (text == "identity") return Activation::identity;
  if (text == "gelu") return Activation::gelu;
  config_error("activation", "unknown activation '" + text + "'");
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void ModelConfig::validate() const {
  require_positive(d_e, "d_e");
  require_positive(vocab_size, "vocab_size");
  require_positive(max_len, "max_len");
  if (!(ln_eps >= 0.0)) config_error("ln_eps", "must be non-negative");
  switch (arch) {
    case Arch::gpt2:
    case Arch::bert:
      require_positive(d_k, "d_k");
      require_positive(d_v, "d_v");
      require_positive(d_f, "d_f");
      require_positive(heads, "M");
      break;
    case Arch::rnn:
    case Arch::lstm:
      require_positive(layers, "L");
      break;
    case Arch::ffnn:
      if (hidden.empty()) config_error("hidden", "at least one hidden layer is required");
      for (auto w : hidden) require_positive(w, "hidden");
      if (layers != hidden.size()) config_error("L", "must equal the number of hidden widths");
      break;
  }
}

ModelConfig gpt2_config(std::size_t d_e, std::size_t layers, std::size_t heads, std::size_t d_k,
                        std::size_t d_v, std::size_t d_f, std::size_t vocab, std::size_t max_len,
                        bool zeta) {
  ModelConfig c;
  c.arch = Arch::gpt2;
  c.d_e = d_e;
  c.layers = layers;
  c.heads = heads;
  c.d_k = d_k;
  c.d_v = d_v;
  c.d_f = d_f;
  c.vocab_size = vocab;
  c.max_len = max_len;
  c.attention_bias = zeta;
  c.norm = NormVariant::pre;
  c.activation = Activation::gelu;
  return c;
}

ModelConfig bert_config(std::size_t d_e, std::size_t layers, std::size_t heads, std::size_t d_k,
                        std::size_t d_v, std::size_t d_f, std::size_t vocab, std::size_t max_len,
                        bool zeta) {
  ModelConfig c = gpt2_config(d_e, layers, heads, d_k, d_v, d_f, vocab, max_len, zeta);
  c.arch = Arch::bert;
  c.norm = NormVariant::post;
  return c;
}

ModelConfig recurrent_config(Arch arch, std::size_t d_e, std::size_t layers, std::size_t vocab,
                             std::size_t max_len) {
  ModelConfig c;
  c.arch = arch;
  c.d_e = d_e;
  c.layers = layers;
  c.vocab_size = vocab;
  c.max_len = max_len;
  c.activation = Activation::tanh;
  return c;
}

ModelConfig ffnn_config(std::size_t context, std::size_t d0, std::vector<std::size_t> hidden,
                        std::size_t vocab, Activation act) {
  ModelConfig c;
  c.arch = Arch::ffnn;
  c.d_e = d0;
  c.max_len = context;
  c.layers = hidden.size();
  c.hidden = std::move(hidden);
  c.vocab_size = vocab;
  c.activation = act;
  return c;
}

ModelConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config, "config line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!kv.emplace(key, value).second) config_error(key, "given more than once");
  }

  if (!kv.contains("arch")) config_error("arch", "missing");
  ModelConfig c;
  const std::string& arch = kv.at("arch");
  if (arch == "ffnn") c.arch = Arch::ffnn;
  else if (arch == "rnn") c.arch = Arch::rnn;
  else if (arch == "lstm") c.arch = Arch::lstm;
  else if (arch == "gpt2") c.arch = Arch::gpt2;
  else if (arch == "bert") c.arch = Arch::bert;
  else config_error("arch", "unknown architecture '" + arch + "'");

  const auto allowed = allowed_keys(c.arch);
  for (const auto& [key, _] : kv) {
    if (!allowed.contains(key)) config_error(key, "unknown or not applicable to arch=" + arch);
  }
  for (const auto& key : required_keys(c.arch)) {
    if (!kv.contains(key)) config_error(key, "missing (required for arch=" + arch + ")");
  }

  // per-arch defaults
  c.norm = c.arch == Arch::bert ? NormVariant::post : NormVariant::pre;
  c.activation = c.arch == Arch::ffnn ? Activation::sigmoid
                 : c.arch == Arch::rnn ? Activation::tanh
                                       : Activation::gelu;

  for (const auto& [key, value] : kv) {
    if (key == "arch") continue;
    if (key == "d_e") c.d_e = parse_size(key, value);
    else if (key == "d_k") c.d_k = parse_size(key, value);
    else if (key == "d_v") c.d_v = parse_size(key, value);
    else if (key == "d_f") c.d_f = parse_size(key, value);
    else if (key == "M") c.heads = parse_size(key, value);
    else if (key == "L") c.layers = parse_size(key, value);
    else if (key == "vocab_size") c.vocab_size = parse_size(key, value);
    else if (key == "max_len") c.max_len = parse_size(key, value);
    else if (key == "zeta") {
      if (value != "0" && value != "1") config_error(key, "must be 0 or 1");
      c.attention_bias = value == "1";
    } else if (key == "norm_variant") {
      if (value == "pre") c.norm = NormVariant::pre;
      else if (value == "post") c.norm = NormVariant::post;
      else config_error(key, "must be 'pre' or 'post'");
    } else if (key == "gelu_mode") {
      if (value == "tanh") c.gelu = GeluMode::tanh_approx;
      else if (value == "exact") c.gelu = GeluMode::exact;
      else config_error(key, "must be 'tanh' or 'exact'");
    } else if (key == "ln_eps") {
      try {
        std::size_t used = 0;
        c.ln_eps = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        config_error(key, "expected a real number, got '" + value + "'");
      }
    } else if (key == "hidden") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) c.hidden.push_back(parse_size(key, trim(item)));
    } else if (key == "activation") {
      c.activation = parse_activation(value);
    }
  }
  if (c.arch == Arch::ffnn && !kv.contains("L")) c.layers = c.hidden.size();
  c.validate();
  return c;
}

ModelConfig parse_config_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string format_config(const ModelConfig& c) {
  std::ostringstream out;
  out << "arch=" << to_string(c.arch) << '\n';
  out << "d_e=" << c.d_e << '\n';
  out << "vocab_size=" << c.vocab_size << '\n';
  out << "max_len=" << c.max_len << '\n';
  switch (c.arch) {
    case Arch::gpt2:
    case Arch::bert: {
      out << "d_k=" << c.d_k << "\nd_v=" << c.d_v << "\nd_f=" << c.d_f << "\nM=" << c.heads
          << "\nL=" << c.layers << "\nzeta=" << (c.attention_bias ? 1 : 0)
          << "\nnorm_variant=" << to_string(c.norm) << "\ngelu_mode=" << to_string(c.gelu) << '\n';
      std::ostringstream eps;
      eps.precision(17);
      eps << c.ln_eps;
      out << "ln_eps=" << eps.str() << '\n';
      break;
    }
    case Arch::rnn: out << "L=" << c.layers << "\nactivation=" << to_string(c.activation) << '\n'; break;
    case Arch::lstm: out << "L=" << c.layers << '\n'; break;
    case Arch::ffnn: {
      out << "hidden=";
      for (std::size_t i = 0; i < c.hidden.size(); ++i) out << (i ? "," : "") << c.hidden[i];
      out << "\nactivation=" << to_string(c.activation) << '\n';
      break;
    }
  }
  return out.str();
}

}  // namespace anlm
