// SPDX-License-Identifier: Apache-2.0
#include "cli/cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "translit/checkpoint.hpp"
#include "translit/corpus.hpp"
#include "translit/decoding.hpp"
#include "translit/errors.hpp"
#include "translit/metrics.hpp"
#include "translit/number_format.hpp"
#include "translit/training.hpp"
#include "translit/unicode.hpp"

namespace translit::cli {

namespace {

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> help{
      {"hidden", "GRU units per encoder direction and in the decoder (default 128)"},
      {"embed", "character embedding width (default 64)"},
      {"attention", "attention layer width (default 128)"},
      {"batch_size", "sequence pairs per minibatch (default 128)"},
      {"clip_threshold", "global gradient norm clipping threshold (default 1)"},
      {"adam_alpha", "Adam step size (default 0.001)"},
      {"adam_beta1", "Adam first-moment decay (default 0.9)"},
      {"adam_beta2", "Adam second-moment decay (default 0.999)"},
      {"adam_epsilon", "Adam denominator offset (default 1e-8)"},
      {"max_epochs", "maximum number of epochs (default 50)"},
      {"patience", "stop after this many epochs without a dev ACC gain (default 5)"},
      {"seed", "seed for initialization and batch order (default 1)"},
      {"dev_beam", "beam width for the per-epoch dev decode (default 10)"},
      {"jobs", "worker threads for dev decoding (default 1)"},
      {"curve_path", "learning-curve CSV to write (required)"},
      {"checkpoint_path", "best checkpoint to write (required)"},
      {"step_log_path", "optional per-update CSV of loss and gradient norms"},
      {"record_wall_time", "write elapsed seconds in the curve instead of 0 (default false)"},
  };
  return help;
}

const std::map<std::string, std::string>& key_aliases() {
  static const std::map<std::string, std::string> aliases{
      {"curve_path", "--curve"}, {"checkpoint_path", "--checkpoint"}, {"step_log_path", "--step-log"}};
  return aliases;
}

std::string option_names(const std::string& key) {
  std::string names = "--" + key;
  std::string dashed = key;
  for (char& c : dashed)
    if (c == '_') c = '-';
  if (dashed != key) names += ",--" + dashed;
  if (auto it = key_aliases().find(key); it != key_aliases().end()) names += "," + it->second;
  return names;
}

/// Config file first, then flags on top.
TrainConfig resolve_config(const std::string& config_path,
                           const std::map<std::string, std::string>& overrides) {
  TrainConfig cfg;
  if (!config_path.empty())
    for (const auto& [k, v] : read_config_file(config_path)) cfg.set(k, v);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

std::ofstream open_file(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

/// Writes to `path` when given, otherwise to `fallback`.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  auto f = open_file(path);
  fn(f);
  if (!f) throw IoError("failed writing " + path);
}

std::vector<std::u32string> read_words(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file " + path);
  std::vector<std::u32string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string word = line.substr(0, line.find('\t'));
    if (!word.empty()) words.push_back(utf8_to_u32(word));
  }
  return words;
}

struct Shared {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("--config", s.config_path, "key=value config file; flags take precedence");
  cmd->add_option_function<std::string>(
      "--seed", [&s](const std::string& v) { s.overrides["seed"] = v; },
      "random seed (inference draws no random numbers; accepted for a uniform interface)");
  cmd->add_option_function<std::string>(
      "--jobs", [&s](const std::string& v) { s.overrides["jobs"] = v; },
      "worker threads; output order always follows input order");
}

std::string format_report(const MetricsReport& r, const std::string& format) {
  return format == "text" ? report_text(r) : report_csv(r);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Character-level neural transliteration: train, evaluate, transliterate, score.",
               "translit"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model; writes the best checkpoint and a learning curve.");
  std::string train_path, dev_path, train_config;
  std::map<std::string, std::string> train_overrides;
  train_cmd->add_option("--train", train_path, "training corpus (TSV)")->required();
  train_cmd->add_option("--dev", dev_path, "dev corpus (TSV) for model selection")->required();
  train_cmd->add_option("--config", train_config, "key=value config file; flags take precedence");
  for (const auto& key : TrainConfig::config_keys()) {
    train_cmd->add_option_function<std::string>(
        option_names(key), [&train_overrides, key](const std::string& v) { train_overrides[key] = v; },
        key_help().at(key));
  }

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Decode a test set and print ACC, F-score, MRR and MAP.");
  Shared eval_shared;
  std::string eval_ckpt, eval_test, eval_nbest_out, eval_output, eval_format = "csv";
  std::size_t eval_beam = 10;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval_cmd->add_option("--test", eval_test, "test corpus (TSV)")->required();
  eval_cmd->add_option("--beam", eval_beam, "beam width, also the n-best size (default 10)");
  eval_cmd->add_option("--nbest-out", eval_nbest_out, "also write the decoded n-best TSV here");
  eval_cmd->add_option("--output", eval_output, "write the report here instead of standard output");
  eval_cmd->add_option("--format", eval_format, "csv (metric,value rows) or text")
      ->check(CLI::IsMember({"csv", "text"}));
  add_shared(eval_cmd, eval_shared);

  // translit
  auto* tr_cmd = app.add_subcommand("translit", "Print n-best transliterations as TSV.");
  Shared tr_shared;
  std::string tr_ckpt, tr_word, tr_input, tr_output;
  std::size_t tr_beam = 10, tr_max_len = 0;
  std::optional<std::size_t> tr_nbest;
  tr_cmd->add_option("--checkpoint", tr_ckpt, "model checkpoint")->required();
  auto* word_opt = tr_cmd->add_option("--word", tr_word, "a single word to transliterate");
  auto* input_opt = tr_cmd->add_option("--input", tr_input, "file with one word per line (first TSV field)");
  word_opt->excludes(input_opt);
  tr_cmd->add_option("--beam", tr_beam, "beam width (default 10)");
  tr_cmd->add_option("--nbest", tr_nbest, "candidates per word, at most the beam width (default: beam width)");
  tr_cmd->add_option("--max-len", tr_max_len, "maximum output length (default 3 * input length + 5)");
  tr_cmd->add_option("--output", tr_output, "write the TSV here instead of standard output");
  add_shared(tr_cmd, tr_shared);

  // score
  auto* score_cmd = app.add_subcommand("score", "Score an n-best TSV against references.");
  Shared score_shared;
  std::string score_nbest, score_refs, score_output, score_format = "csv";
  std::size_t cutoff = kDefaultCutoff;
  score_cmd->add_option("--nbest", score_nbest, "n-best TSV (source, rank, candidate, logprob, normalized)")
      ->required();
  score_cmd->add_option("--references", score_refs, "reference corpus (TSV)")->required();
  score_cmd->add_option("--cutoff", cutoff, "candidates kept per source (default 10)");
  score_cmd->add_option("--output", score_output, "write the report here instead of standard output");
  score_cmd->add_option("--format", score_format, "csv (metric,value rows) or text")
      ->check(CLI::IsMember({"csv", "text"}));
  add_shared(score_cmd, score_shared);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) {
      const TrainConfig cfg = resolve_config(train_config, train_overrides);
      if (cfg.checkpoint_path.empty()) throw ConfigError("train needs --checkpoint");
      if (cfg.curve_path.empty()) throw ConfigError("train needs --curve");
      const auto train_pairs = load_corpus(train_path);
      const auto dev_pairs = load_corpus(dev_path);
      const auto result = train(cfg, train_pairs, dev_pairs, [&](const CurveRow& r) {
        out << "epoch " << r.epoch << "  train_nll " << format_number(r.train_nll) << "  dev_acc "
            << format_number(r.dev_acc) << '\n'
            << std::flush;
      });
      out << "best epoch " << result.best_epoch << ", checkpoint " << cfg.checkpoint_path.string()
          << '\n';
    } else if (eval_cmd->parsed()) {
      const TrainConfig cfg = resolve_config(eval_shared.config_path, eval_shared.overrides);
      const Checkpoint ckpt = load_checkpoint(eval_ckpt);
      const auto pairs = load_corpus(eval_test);
      BeamOptions opts;
      opts.beam_width = eval_beam;
      opts.n_best = eval_beam;
      std::vector<std::vector<Transliteration>> nbest;
      const MetricsReport report = evaluate(ckpt, pairs, opts, cfg.jobs, &nbest);
      if (!eval_nbest_out.empty()) {
        emit(eval_nbest_out, out, [&](std::ostream& o) {
          for (std::size_t i = 0; i < pairs.size(); ++i) write_nbest(o, pairs[i].source, nbest[i]);
        });
      }
      emit(eval_output, out, [&](std::ostream& o) { o << format_report(report, eval_format); });
    } else if (tr_cmd->parsed()) {
      const TrainConfig cfg = resolve_config(tr_shared.config_path, tr_shared.overrides);
      if (tr_word.empty() && tr_input.empty()) throw InvalidInputError("translit needs --word or --input");
      const Checkpoint ckpt = load_checkpoint(tr_ckpt);
      ckpt.check_consistent();
      std::vector<std::u32string> words =
          tr_input.empty() ? std::vector<std::u32string>{utf8_to_u32(tr_word)} : read_words(tr_input);
      BeamOptions opts;
      opts.beam_width = tr_beam;
      opts.n_best = tr_nbest.value_or(tr_beam);
      opts.max_len = tr_max_len;
      const auto results = transliterate_all(ckpt, words, opts, cfg.jobs);
      emit(tr_output, out, [&](std::ostream& o) {
        for (std::size_t i = 0; i < words.size(); ++i) write_nbest(o, words[i], results[i]);
      });
    } else if (score_cmd->parsed()) {
      resolve_config(score_shared.config_path, score_shared.overrides);
      if (cutoff < 1) throw InvalidInputError("--cutoff must be at least 1");
      const MetricsReport report = score_file(score_nbest, score_refs, cutoff);
      emit(score_output, out, [&](std::ostream& o) { o << format_report(report, score_format); });
    }
  } catch (const NonFiniteLossError& e) {
    err << "error: training aborted: " << e.what() << '\n';
    return kExitAbort;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CompatibilityError& e) {
    err << "error: incompatible checkpoint: " << e.what() << '\n';
    return kExitUsage;
  } catch (const AlignmentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidInputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitAbort;
  }
  return kExitOk;
}

}  // namespace translit::cli
