// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "translit/checkpoint.hpp"
#include "translit/model.hpp"

namespace translit {

struct BeamOptions {
  std::size_t beam_width = 10;
  /// 0 selects 3 * source length + 5.
  std::size_t max_len = 0;
  std::size_t n_best = 10;
};

std::size_t default_max_len(std::size_t source_length);

/// A partial or finished decode.
struct Hypothesis {
  std::vector<int> ids;  // emitted ids, EOS included when finished by it
  double log_prob = 0.0;
  bool finished = false;

  /// log_prob per emitted token.
  double normalized() const;
};

/// Beam search from BOS over every target id except PAD and BOS. Finished
/// hypotheses are ranked by normalized score, ties by id sequence.
std::vector<Hypothesis> beam_search(const ModelParams& p, std::span<const int> source_ids,
                                    const BeamOptions& opts);

/// Step-wise argmax decoding, same candidate set as beam_search.
Hypothesis greedy_decode(const ModelParams& p, std::span<const int> source_ids,
                         std::size_t max_len);

struct Transliteration {
  std::u32string text;
  double log_prob = 0.0;
  double normalized = 0.0;
};

/// Encodes the source (UNK for unseen characters), searches, and renders
/// the n-best list; ties in normalized score are ordered by output string.
std::vector<Transliteration> transliterate(const Checkpoint& ckpt, std::u32string_view source,
                                           const BeamOptions& opts);

/// transliterate() over many sources on `jobs` threads; output order
/// follows input order.
std::vector<std::vector<Transliteration>> transliterate_all(const Checkpoint& ckpt,
                                                            std::span<const std::u32string> sources,
                                                            const BeamOptions& opts,
                                                            std::size_t jobs);

/// `source<TAB>rank<TAB>candidate<TAB>logprob<TAB>normalized_logprob` rows,
/// rank starting at 1.
void write_nbest(std::ostream& out, std::u32string_view source,
                 std::span<const Transliteration> results);

}  // namespace translit
