// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "translit/corpus.hpp"
#include "translit/vocab.hpp"

namespace translit {

/// One (source, reference) training example as ids; target ends with EOS.
struct EncodedPair {
  std::vector<int> source;
  std::vector<int> target;
};

/// Expands every reference of every pair into its own example.
std::vector<EncodedPair> encode_pairs(std::span<const SequencePair> pairs, const Vocabulary& src,
                                      const Vocabulary& tgt);

/// Padded id matrices with {0,1} masks, row-major [rows x len].
struct Batch {
  std::size_t rows = 0;
  std::size_t src_len = 0;
  std::size_t tgt_len = 0;
  std::vector<int> src_ids;
  std::vector<double> src_mask;
  std::vector<int> tgt_ids;
  std::vector<double> tgt_mask;
  std::vector<std::size_t> src_lengths;
  std::vector<std::size_t> tgt_lengths;
  /// Position of each row's example in the list the batch was built from.
  std::vector<std::size_t> example_index;

  int src_id(std::size_t row, std::size_t t) const { return src_ids[row * src_len + t]; }
  int tgt_id(std::size_t row, std::size_t t) const { return tgt_ids[row * tgt_len + t]; }
  std::size_t target_tokens() const;
};

/// Pads the selected examples into one batch. An empty source is rejected.
Batch make_batch(std::span<const EncodedPair> examples, std::span<const std::size_t> which);

inline constexpr std::size_t kBucketWidth = 4;

/// Groups examples into source-length buckets of width kBucketWidth and cuts
/// the sequence into batches of batch_size. With shuffle on, example order
/// within buckets and the batch order are permuted from `seed`.
std::vector<Batch> make_batches(std::span<const EncodedPair> examples, std::size_t batch_size,
                                std::uint64_t seed, bool shuffle);

}  // namespace translit
