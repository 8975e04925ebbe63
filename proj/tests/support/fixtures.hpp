// SPDX-License-Identifier: Apache-2.0
// Small models and batches shared by the model, decoding and acceptance tests.
#pragma once

#include <vector>

#include "translit/batch.hpp"
#include "translit/model.hpp"
#include "translit/random.hpp"

namespace translit::testing {

inline ModelDims tiny_dims(std::size_t src_vocab = 10, std::size_t tgt_vocab = 10) {
  ModelDims d;
  d.src_vocab = src_vocab;
  d.tgt_vocab = tgt_vocab;
  d.embed = 4;
  d.hidden = 8;
  d.attention = 6;
  return d;
}

/// Every parameter (biases included) uniform in [-scale, scale].
inline ModelParams random_params(const ModelDims& dims, Rng& rng, double scale = 0.5) {
  ModelParams p = ModelParams::zeros(dims);
  for (auto& [name, t] : p.named())
    for (double& v : t->mutable_values()) v = rng.uniform(-scale, scale);
  return p;
}

/// Random non-reserved ids in [kReservedCount, vocab).
inline std::vector<int> random_ids(Rng& rng, std::size_t len, std::size_t vocab) {
  std::vector<int> ids(len);
  for (int& id : ids) id = kReservedCount + static_cast<int>(rng.below(vocab - kReservedCount));
  return ids;
}

/// Two examples of different source and target lengths.
inline std::vector<EncodedPair> two_pair_examples() {
  return {{{4, 5, 6}, {7, 4, 9, kEos}}, {{9, 8, 7, 4, 5}, {5, 6, kEos}}};
}

inline Batch batch_of(const std::vector<EncodedPair>& examples) {
  std::vector<std::size_t> all(examples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return make_batch(examples, all);
}

}  // namespace translit::testing
