// SPDX-License-Identifier: Apache-2.0
#include "translit/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "translit/batch.hpp"
#include "translit/errors.hpp"
#include "translit/number_format.hpp"
#include "translit/ops.hpp"
#include "translit/tape.hpp"

namespace translit {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof())
    throw ConfigError("bad value '" + value + "' for " + key);
  if constexpr (std::is_unsigned_v<T>) {
    if (value.find('-') != std::string::npos)
      throw ConfigError("bad value '" + value + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw ConfigError("bad boolean '" + value + "' for " + key);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  auto positive = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(hidden > 0, "hidden");
  positive(embed > 0, "embed");
  positive(attention > 0, "attention");
  positive(batch_size > 0, "batch_size");
  positive(clip_threshold > 0.0, "clip_threshold");
  positive(adam.alpha > 0.0, "adam_alpha");
  positive(adam.beta1 > 0.0 && adam.beta1 < 1.0, "adam_beta1 (below 1)");
  positive(adam.beta2 > 0.0 && adam.beta2 < 1.0, "adam_beta2 (below 1)");
  positive(adam.epsilon > 0.0, "adam_epsilon");
  positive(max_epochs > 0, "max_epochs");
  positive(patience > 0, "patience");
  positive(dev_beam > 0, "dev_beam");
  positive(jobs > 0, "jobs");
  if (patience > max_epochs) throw ConfigError("patience must not exceed max_epochs");
}

const std::vector<std::string>& TrainConfig::config_keys() {
  static const std::vector<std::string> keys{
      "hidden",     "embed",        "attention",     "batch_size",   "clip_threshold",
      "adam_alpha", "adam_beta1",   "adam_beta2",    "adam_epsilon", "max_epochs",
      "patience",   "seed",         "dev_beam",      "jobs",         "curve_path",
      "checkpoint_path", "step_log_path", "record_wall_time"};
  return keys;
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  if (key == "hidden") hidden = parse_number<std::size_t>(key, value);
  else if (key == "embed") embed = parse_number<std::size_t>(key, value);
  else if (key == "attention") attention = parse_number<std::size_t>(key, value);
  else if (key == "batch_size") batch_size = parse_number<std::size_t>(key, value);
  else if (key == "clip_threshold") clip_threshold = parse_number<double>(key, value);
  else if (key == "adam_alpha") adam.alpha = parse_number<double>(key, value);
  else if (key == "adam_beta1") adam.beta1 = parse_number<double>(key, value);
  else if (key == "adam_beta2") adam.beta2 = parse_number<double>(key, value);
  else if (key == "adam_epsilon") adam.epsilon = parse_number<double>(key, value);
  else if (key == "max_epochs") max_epochs = parse_number<int>(key, value);
  else if (key == "patience") patience = parse_number<int>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "dev_beam") dev_beam = parse_number<std::size_t>(key, value);
  else if (key == "jobs") jobs = parse_number<std::size_t>(key, value);
  else if (key == "curve_path") curve_path = value;
  else if (key == "checkpoint_path") checkpoint_path = value;
  else if (key == "step_log_path") step_log_path = value;
  else if (key == "record_wall_time") record_wall_time = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

std::string format_curve_row(const CurveRow& r) {
  return std::to_string(r.epoch) + "," + format_number(r.train_nll) + "," +
         format_number(r.dev_acc) + "," + format_number(r.dev_fscore) + "," +
         format_number(r.dev_mrr) + "," + format_number(r.dev_map) + "," +
         format_number(r.wall_seconds);
}

MetricsReport evaluate(const Checkpoint& ckpt, std::span<const SequencePair> pairs,
                       const BeamOptions& opts, std::size_t jobs,
                       std::vector<std::vector<Transliteration>>* nbest) {
  ckpt.check_consistent();
  if (pairs.empty()) throw InvalidInputError("evaluate: no pairs");
  std::vector<std::u32string> sources;
  for (const auto& p : pairs) sources.push_back(p.source);
  auto decoded = transliterate_all(ckpt, sources, opts, jobs);

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pairs[a].source < pairs[b].source; });
  std::vector<EvalItem> items;
  for (std::size_t i : order) {
    EvalItem item{pairs[i].targets, {}};
    for (std::size_t k = 0; k < decoded[i].size() && k < kDefaultCutoff; ++k)
      item.candidates.push_back(decoded[i][k].text);
    items.push_back(std::move(item));
  }
  if (nbest) *nbest = std::move(decoded);
  return compute_report(items);
}

TrainResult train(const TrainConfig& cfg, std::span<const SequencePair> train_pairs,
                  std::span<const SequencePair> dev_pairs, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_pairs.empty()) throw InvalidInputError("training corpus is empty");
  if (dev_pairs.empty()) throw InvalidInputError("dev corpus is empty");

  Checkpoint current;
  current.src_vocab = Vocabulary::build(train_pairs, Side::source);
  current.tgt_vocab = Vocabulary::build(train_pairs, Side::target);
  ModelDims dims;
  dims.src_vocab = current.src_vocab.size();
  dims.tgt_vocab = current.tgt_vocab.size();
  dims.embed = cfg.embed;
  dims.hidden = cfg.hidden;
  dims.attention = cfg.attention;
  current.params = ModelParams::init(dims, cfg.seed);

  const auto examples = encode_pairs(train_pairs, current.src_vocab, current.tgt_vocab);
  AdamState adam{cfg.adam, 0, {}, {}};
  std::vector<Tensor*> param_ptrs;
  for (auto& [name, t] : current.params.named()) param_ptrs.push_back(t);

  std::ofstream curve_out, step_out;
  if (!cfg.curve_path.empty()) {
    curve_out = open_output(cfg.curve_path);
    curve_out << kCurveHeader << '\n' << std::flush;
  }
  if (!cfg.step_log_path.empty()) {
    step_out = open_output(cfg.step_log_path);
    step_out << "epoch,batch,loss,grad_norm,clipped_norm\n";
  }

  BeamOptions dev_opts;
  dev_opts.beam_width = cfg.dev_beam;
  dev_opts.n_best = cfg.dev_beam;

  TrainResult result;
  double best_acc = -1.0;
  int since_best = 0;
  const auto started = std::chrono::steady_clock::now();

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto batches =
        make_batches(examples, cfg.batch_size, cfg.seed + static_cast<std::uint64_t>(epoch), true);
    double nll_sum = 0.0;
    std::size_t token_sum = 0;

    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& batch = batches[bi];
      Tape tape;
      TapeScope scope(tape);
      ModelParams watched = current.params;
      std::vector<Tensor*> watched_ptrs;
      for (auto& [name, t] : watched.named()) {
        *t = tape.watch(*t);
        watched_ptrs.push_back(t);
      }
      const Tensor loss = sequence_nll(watched, batch);
      const double value = loss.item();
      if (!std::isfinite(value)) throw NonFiniteLossError(epoch, bi, value);

      const Gradients grads = backward(tape, loss);
      std::vector<Tensor> g;
      g.reserve(watched_ptrs.size());
      for (const Tensor* t : watched_ptrs) g.push_back(grads.of(*t));
      const double norm = global_norm(g);
      g = clip_global_norm(std::move(g), cfg.clip_threshold);
      const double clipped = global_norm(g);
      adam_update(adam, param_ptrs, g);

      result.steps.push_back({epoch, bi, value, norm, clipped});
      if (step_out)
        step_out << epoch << ',' << bi << ',' << format_number(value) << ','
                 << format_number(norm) << ',' << format_number(clipped) << '\n';
      nll_sum += value * static_cast<double>(batch.target_tokens());
      token_sum += batch.target_tokens();
    }

    const MetricsReport dev = evaluate(current, dev_pairs, dev_opts, cfg.jobs);
    CurveRow row;
    row.epoch = epoch;
    row.train_nll = nll_sum / static_cast<double>(token_sum);
    row.dev_acc = dev.acc;
    row.dev_fscore = dev.fscore;
    row.dev_mrr = dev.mrr;
    row.dev_map = dev.map;
    if (cfg.record_wall_time)
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.curve.push_back(row);
    if (curve_out) curve_out << format_curve_row(row) << '\n' << std::flush;
    if (step_out) step_out << std::flush;

    if (dev.acc > best_acc) {
      best_acc = dev.acc;
      since_best = 0;
      result.best = current;
      result.best_epoch = epoch;
      if (!cfg.checkpoint_path.empty()) save_checkpoint(cfg.checkpoint_path, current);
    } else {
      ++since_best;
    }
    if (on_epoch) on_epoch(row);
    if (since_best >= cfg.patience) break;
  }
  return result;
}

}  // namespace translit
