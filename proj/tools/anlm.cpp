// SPDX-License-Identifier: Apache-2.0
//
// anlm: parameter counting, scoring, generation, mask filling and toy
// training from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 audit mismatch.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "anlm/config.hpp"
#include "anlm/errors.hpp"
#include "anlm/language_model.hpp"
#include "anlm/losses.hpp"
#include "anlm/model_io.hpp"
#include "anlm/param_audit.hpp"
#include "anlm/training.hpp"
#include "anlm/transformer.hpp"
#include "anlm/vocab.hpp"

namespace {

using namespace anlm;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitAudit = 3;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs a loader and prefixes any failure with the option it came from.
template <typename F>
auto load_for(const std::string& option, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw DataError(option + ": " + e.what());
  }
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_vocab_matches(const ModelConfig& cfg, const Vocabulary& vocab) {
  if (vocab.size() != cfg.vocab_size) {
    throw DataError("vocab_size: config declares " + std::to_string(cfg.vocab_size) + " but the vocabulary has " +
                    std::to_string(vocab.size()) + " tokens");
  }
}

struct ModelFiles {
  std::string config, weights, vocab;

  void add_to(CLI::App* cmd, bool with_weights = true, bool with_vocab = true) {
    cmd->add_option("--config", config, "model config file")->required();
    if (with_weights) cmd->add_option("--weights", weights, "tensor archive")->required();
    if (with_vocab) cmd->add_option("--vocab", vocab, "vocabulary file")->required();
  }
};

int cmd_count_params(const std::string& config, bool mlm, bool nsp, bool kv) {
  const auto cfg = load_for("--config", [&] { return load_config(config); });
  const auto report = count_params(cfg, mlm, nsp);
  std::cout << (kv ? format_report_kv(report) : format_report_table(report));
  return 0;
}

int cmd_init(const std::string& config, std::uint64_t seed, const std::string& out) {
  const auto cfg = load_for("--config", [&] { return load_config(config); });
  save_weights(init_weights(cfg, seed), out);
  return 0;
}

int cmd_generate(const ModelFiles& f, const std::string& prompt, std::size_t steps) {
  const auto cfg = load_for("--config", [&] { return load_config(f.config); });
  const auto ws = load_for("--weights", [&] { return load_weights(f.weights); });
  const auto vocab = load_for("--vocab", [&] { return load_vocabulary(f.vocab); });
  require_vocab_matches(cfg, vocab);
  const auto seq = load_for("--prompt", [&] { return tokenize(prompt, vocab); });
  std::vector<TokenId> ids;
  if (cfg.arch == Arch::gpt2) {
    const auto w = Gpt2Weights::from_weight_set(ws, cfg);
    ids = load_for("--steps", [&] { return greedy_decode(seq, w, steps).ids; });
  } else {
    const auto model = make_language_model(cfg, ws);
    if (seq.size() < model->min_context()) {
      throw DataError("--prompt: " + std::to_string(seq.size()) + " tokens, the model needs at least " +
                      std::to_string(model->min_context()));
    }
    ids = greedy_continue(*model, seq.ids, steps);
  }
  std::cout << detokenize(ids, vocab) << '\n';
  return 0;
}

int cmd_score(const ModelFiles& f, const std::string& text) {
  const auto cfg = load_for("--config", [&] { return load_config(f.config); });
  const auto ws = load_for("--weights", [&] { return load_weights(f.weights); });
  const auto vocab = load_for("--vocab", [&] { return load_vocabulary(f.vocab); });
  require_vocab_matches(cfg, vocab);
  const auto seq = load_for("--text", [&] { return tokenize(text, vocab); });
  const auto model = make_language_model(cfg, ws);
  std::cout << format_real(load_for("--text", [&] { return corpus_nll(seq.ids, *model); })) << '\n';
  return 0;
}

int cmd_fill_mask(const ModelFiles& f, const std::string& text) {
  const auto cfg = load_for("--config", [&] { return load_config(f.config); });
  if (cfg.arch != Arch::bert) throw DataError("--config: fill-mask needs arch=bert");
  const auto ws = load_for("--weights", [&] { return load_weights(f.weights); });
  const auto vocab = load_for("--vocab", [&] { return load_vocabulary(f.vocab); });
  require_vocab_matches(cfg, vocab);
  const auto& sp = vocab.specials();
  if (!sp.cls || !sp.sep || !sp.mask) throw DataError("--vocab: [CLS], [SEP] and [MASK] are required");

  auto seq = load_for("--text", [&] { return tokenize(text, vocab); });
  if (seq.ids.front() != *sp.cls) seq.ids.insert(seq.ids.begin(), *sp.cls);
  if (seq.ids.back() != *sp.sep) seq.ids.push_back(*sp.sep);

  const auto w = BertWeights::from_weight_set(ws, cfg);
  const auto h = load_for("--text", [&] { return bert_forward(seq, w, sp); });
  const auto dists = mlm_head(h, w);
  std::size_t slots = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq.ids[i] != *sp.mask) continue;
    std::cout << vocab.token(static_cast<TokenId>(argmax(dists[i].values()))) << '\n';
    ++slots;
  }
  if (slots == 0) throw DataError("--text: no [MASK] token in the input");
  return 0;
}

int cmd_train_toy(const ModelFiles& f, const std::string& corpus_path, std::size_t steps, double lr,
                  std::uint64_t seed, const std::string& out, const std::string& log_path) {
  const auto cfg = load_for("--config", [&] { return load_config(f.config); });
  const auto vocab = load_for("--vocab", [&] { return load_vocabulary(f.vocab); });
  require_vocab_matches(cfg, vocab);
  const auto corpus = load_for("--corpus", [&] { return tokenize(read_text_file(corpus_path), vocab); });
  if (!(lr > 0.0)) throw DataError("--lr: learning rate must be positive");

  std::ofstream log_file;
  std::ostream* log = &std::cerr;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw DataError("--log: cannot open '" + log_path + "'");
    log = &log_file;
  }
  TrainOptions opts;
  opts.steps = steps;
  opts.lr = lr;
  opts.log = log;
  const auto state = train(cfg, init_weights(cfg, seed), corpus.ids, opts);
  const double final_loss = mean_corpus_loss(cfg, state.weights, corpus.ids);
  *log << state.step << '\t' << final_loss << '\t' << state.lr << '\n';
  save_weights(state.weights, out);
  std::cout << "final_loss=" << format_real(final_loss) << '\n';
  return 0;
}

int cmd_audit(const std::string& config, const std::string& weights) {
  const auto cfg = load_for("--config", [&] { return load_config(config); });
  const auto ws = load_for("--weights", [&] { return load_weights(weights); });
  const bool mlm = cfg.arch == Arch::bert && ws.contains("mlm.W");
  const bool nsp = cfg.arch == Arch::bert && ws.contains("nsp.W");
  const Count formula = count_params(cfg, mlm, nsp).total;
  const Count enumerated = enumerate_weights(ws);
  std::cout << "formula=" << formula << "\nenumerated=" << enumerated << '\n';
  if (formula != enumerated) {
    std::cerr << "audit: formula count " << formula << " != enumerated count " << enumerated << '\n';
    return kExitAudit;
  }
  std::cout << "audit=ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural language model toolkit"};
  app.require_subcommand(1);

  std::string config, weights, corpus, out, log_path, prompt, text;
  bool with_mlm = false, with_nsp = false, kv = false;
  std::size_t steps = 0;
  double lr = 0.1;
  std::uint64_t seed = 0;
  ModelFiles files;

  auto* count = app.add_subcommand("count-params", "closed-form trainable parameter count");
  count->add_option("--config", config, "model config file")->required();
  count->add_flag("--with-mlm", with_mlm, "include the BERT MLM head");
  count->add_flag("--with-nsp", with_nsp, "include the BERT NSP head");
  count->add_flag("--kv", kv, "print name=value lines instead of a table");

  auto* init = app.add_subcommand("init", "write randomly initialised weights");
  init->add_option("--config", config, "model config file")->required();
  init->add_option("--seed", seed, "generator seed");
  init->add_option("--out", out, "output archive")->required();

  auto* generate = app.add_subcommand("generate", "greedy continuation of a prompt");
  files.add_to(generate);
  generate->add_option("--prompt", prompt, "whitespace-separated prompt")->required();
  generate->add_option("--steps", steps, "tokens to append")->required();

  auto* score = app.add_subcommand("score", "negative log-likelihood of a text");
  files.add_to(score);
  score->add_option("--text", text, "whitespace-separated text")->required();

  auto* fill = app.add_subcommand("fill-mask", "top-1 prediction for every [MASK]");
  files.add_to(fill);
  fill->add_option("--text", text, "text containing [MASK] tokens")->required();

  auto* train_cmd = app.add_subcommand("train-toy", "gradient descent with numerical gradients");
  files.add_to(train_cmd, false, true);
  train_cmd->add_option("--corpus", corpus, "training text file")->required();
  train_cmd->add_option("--steps", steps, "gradient steps")->required();
  train_cmd->add_option("--lr", lr, "learning rate");
  train_cmd->add_option("--seed", seed, "initialisation seed");
  train_cmd->add_option("--out", out, "output archive")->required();
  train_cmd->add_option("--log", log_path, "per-step log file (default: stderr)");

  auto* audit = app.add_subcommand("audit", "check formula count against stored weights");
  audit->add_option("--config", config, "model config file")->required();
  audit->add_option("--weights", weights, "tensor archive")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*count) return cmd_count_params(config, with_mlm, with_nsp, kv);
    if (*init) return cmd_init(config, seed, out);
    if (*generate) return cmd_generate(files, prompt, steps);
    if (*score) return cmd_score(files, text);
    if (*fill) return cmd_fill_mask(files, text);
    if (*train_cmd) return cmd_train_toy(files, corpus, steps, lr, seed, out, log_path);
    if (*audit) return cmd_audit(config, weights);
  } catch (const std::exception& e) {
    std::cerr << "anlm: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
