// SPDX-License-Identifier: Apache-2.0
#include "translit/batch.hpp"

#include <algorithm>
#include <numeric>

#include "translit/errors.hpp"
#include "translit/random.hpp"

namespace translit {

std::vector<EncodedPair> encode_pairs(std::span<const SequencePair> pairs, const Vocabulary& src,
                                      const Vocabulary& tgt) {
  std::vector<EncodedPair> out;
  for (const auto& p : pairs) {
    auto source = encode_sequence(src, p.source, false);
    for (const auto& t : p.targets) out.push_back({source, encode_sequence(tgt, t, true)});
  }
  return out;
}

std::size_t Batch::target_tokens() const {
  return std::accumulate(tgt_lengths.begin(), tgt_lengths.end(), std::size_t{0});
}

Batch make_batch(std::span<const EncodedPair> examples, std::span<const std::size_t> which) {
  if (which.empty()) throw InvalidInputError("make_batch: no examples selected");
  Batch b;
  b.rows = which.size();
  for (std::size_t i : which) {
    const auto& ex = examples[i];
    if (ex.source.empty()) throw InvalidInputError("make_batch: empty source sequence");
    if (ex.target.empty()) throw InvalidInputError("make_batch: empty target sequence");
    b.src_len = std::max(b.src_len, ex.source.size());
    b.tgt_len = std::max(b.tgt_len, ex.target.size());
  }
  b.src_ids.assign(b.rows * b.src_len, kPad);
  b.src_mask.assign(b.rows * b.src_len, 0.0);
  b.tgt_ids.assign(b.rows * b.tgt_len, kPad);
  b.tgt_mask.assign(b.rows * b.tgt_len, 0.0);
  for (std::size_t r = 0; r < b.rows; ++r) {
    const auto& ex = examples[which[r]];
    for (std::size_t t = 0; t < ex.source.size(); ++t) {
      b.src_ids[r * b.src_len + t] = ex.source[t];
      b.src_mask[r * b.src_len + t] = 1.0;
    }
    for (std::size_t t = 0; t < ex.target.size(); ++t) {
      b.tgt_ids[r * b.tgt_len + t] = ex.target[t];
      b.tgt_mask[r * b.tgt_len + t] = 1.0;
    }
    b.src_lengths.push_back(ex.source.size());
    b.tgt_lengths.push_back(ex.target.size());
    b.example_index.push_back(which[r]);
  }
  return b;
}

std::vector<Batch> make_batches(std::span<const EncodedPair> examples, std::size_t batch_size,
                                std::uint64_t seed, bool shuffle) {
  if (batch_size < 1) throw InvalidInputError("batch_size must be at least 1");
  if (examples.empty()) throw InvalidInputError("cannot batch an empty corpus");

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  if (shuffle) rng.shuffle(std::span(order));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return examples[a].source.size() / kBucketWidth < examples[b].source.size() / kBucketWidth;
  });

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - start);
    batches.push_back(make_batch(examples, std::span(order).subspan(start, n)));
  }
  if (shuffle) rng.shuffle(std::span(batches));
  return batches;
}

}  // namespace translit
