// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "translit/checkpoint.hpp"
#include "translit/corpus.hpp"
#include "translit/decoding.hpp"
#include "translit/metrics.hpp"
#include "translit/optim.hpp"

namespace translit {

struct TrainConfig {
  std::size_t hidden = 128;
  std::size_t embed = 64;
  std::size_t attention = 128;
  std::size_t batch_size = 128;
  double clip_threshold = 1.0;
  AdamConfig adam;
  int max_epochs = 50;
  int patience = 5;
  std::uint64_t seed = 1;
  std::size_t dev_beam = 10;
  std::size_t jobs = 1;
  /// Empty paths are not written.
  std::filesystem::path curve_path;
  std::filesystem::path checkpoint_path;
  std::filesystem::path step_log_path;
  /// Off by default: wall_seconds is then written as 0 and the curve files
  /// of two runs with the same seed compare byte-for-byte.
  bool record_wall_time = false;

  /// Throws ConfigError on a non-positive value or patience > max_epochs.
  void validate() const;

  /// Sets one field from its key=value spelling (keys as in config_keys()).
  void set(const std::string& key, const std::string& value);
  static const std::vector<std::string>& config_keys();
};

/// Reads a flat `key = value` file; `#` starts a comment line.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

struct CurveRow {
  int epoch = 0;
  double train_nll = 0.0;
  double dev_acc = 0.0;
  double dev_fscore = 0.0;
  double dev_mrr = 0.0;
  double dev_map = 0.0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kCurveHeader =
    "epoch,train_nll,dev_acc,dev_fscore,dev_mrr,dev_map,wall_seconds";

std::string format_curve_row(const CurveRow& row);

/// Per-update record: loss and global gradient norm before/after clipping.
struct StepRecord {
  int epoch = 0;
  std::size_t batch = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double clipped_norm = 0.0;
};

struct TrainResult {
  Checkpoint best;  // highest dev ACC seen; earliest epoch wins ties
  int best_epoch = 0;
  std::vector<CurveRow> curve;
  std::vector<StepRecord> steps;
};

/// Called after each epoch's curve row is appended.
using EpochCallback = std::function<void(const CurveRow&)>;

/// Minibatch Adam training on the per-token NLL with global-norm clipping;
/// dev set decoded with beam search after every epoch, early stopping on
/// dev ACC. Vocabularies come from the training pairs only.
/// Throws NonFiniteLossError if a batch loss is NaN or infinite.
TrainResult train(const TrainConfig& cfg, std::span<const SequencePair> train_pairs,
                  std::span<const SequencePair> dev_pairs, const EpochCallback& on_epoch = {});

/// Decodes every source and scores the n-best lists (cut at 10), items in
/// source order as score_file does. When `nbest` is non-null the decoded
/// lists are stored there in input order.
MetricsReport evaluate(const Checkpoint& ckpt, std::span<const SequencePair> pairs,
                       const BeamOptions& opts, std::size_t jobs = 1,
                       std::vector<std::vector<Transliteration>>* nbest = nullptr);

}  // namespace translit
