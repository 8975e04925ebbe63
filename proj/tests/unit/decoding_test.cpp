// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "translit/decoding.hpp"
#include "translit/errors.hpp"
#include "translit/unicode.hpp"

namespace translit {
namespace {

using namespace translit::testing;

TEST(BeamSearch, WidthOneIsGreedy) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_params(tiny_dims(8, 7), rng, 1.0);
    auto src = random_ids(rng, 1 + rng.below(5), 8);
    BeamOptions opts;
    opts.beam_width = 1;
    opts.n_best = 1;
    auto beam = beam_search(p, src, opts);
    auto greedy = greedy_decode(p, src, 0);
    ASSERT_EQ(beam.size(), 1u);
    EXPECT_EQ(beam[0].ids, greedy.ids);
    EXPECT_EQ(beam[0].log_prob, greedy.log_prob);
  }
}

TEST(BeamSearch, WideBeamFindsEnumerationArgmax) {
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_params(tiny_dims(8, 6), rng, 1.5);
    auto src = random_ids(rng, 1 + rng.below(4), 8);
    BeamOptions opts;
    opts.beam_width = 64;
    opts.n_best = 1;
    opts.max_len = 2;
    auto beam = beam_search(p, src, opts);
    auto best = enumerate_best(p, src, 2);
    ASSERT_FALSE(beam.empty());
    EXPECT_EQ(beam[0].ids, best.ids);
    EXPECT_NEAR(beam[0].log_prob, best.log_prob, 1e-12);
  }
}

TEST(BeamSearch, ExhaustiveBeamDominatesNarrowerBeams) {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_params(tiny_dims(8, 6), rng, 1.5);
    auto src = random_ids(rng, 3, 8);
    BeamOptions wide;
    wide.beam_width = 64;
    wide.n_best = 1;
    wide.max_len = 3;
    const double top = beam_search(p, src, wide)[0].normalized();
    for (std::size_t width = 1; width < 64; width *= 2) {
      BeamOptions narrow = wide;
      narrow.beam_width = width;
      EXPECT_GE(top, beam_search(p, src, narrow)[0].normalized()) << "width " << width;
    }
  }
}

TEST(BeamSearch, SortedBoundedDistinct) {
  Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_params(tiny_dims(8, 9), rng, 1.0);
    auto src = random_ids(rng, 2 + rng.below(3), 8);
    BeamOptions opts;
    opts.beam_width = 6;
    opts.n_best = 4;
    auto out = beam_search(p, src, opts);
    EXPECT_LE(out.size(), 4u);
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_TRUE(out[i].finished);
      EXPECT_LE(out[i].log_prob, 0.0);
      EXPECT_TRUE(seen.insert(out[i].ids).second);
      if (i > 0) EXPECT_GE(out[i - 1].normalized(), out[i].normalized());
      for (std::size_t k = 0; k + 1 < out[i].ids.size(); ++k) EXPECT_NE(out[i].ids[k], kEos);
      EXPECT_LE(out[i].ids.size(), default_max_len(src.size()));
    }
  }
}

TEST(BeamSearch, Errors) {
  Rng rng(25);
  auto p = random_params(tiny_dims(), rng);
  const std::vector<int> src{4, 5};
  BeamOptions opts;
  EXPECT_THROW(beam_search(p, std::vector<int>{}, opts), InvalidInputError);
  opts.beam_width = 2;
  opts.n_best = 3;
  EXPECT_THROW(beam_search(p, src, opts), InvalidInputError);
  opts.beam_width = 0;
  opts.n_best = 0;
  EXPECT_THROW(beam_search(p, src, opts), InvalidInputError);
}

Checkpoint random_checkpoint(Rng& rng, std::vector<char32_t> tgt_symbols) {
  Checkpoint c;
  c.src_vocab = Vocabulary({U'a', U'b', U'c', U'd'});
  c.tgt_vocab = Vocabulary(std::move(tgt_symbols));
  c.params = random_params(tiny_dims(c.src_vocab.size(), c.tgt_vocab.size()), rng, 1.0);
  return c;
}

TEST(Transliterate, SmallSpaceIsBoundedAndDistinct) {
  Rng rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    auto ckpt = random_checkpoint(rng, {U'X', U'Y', U'Z'});
    BeamOptions opts;
    opts.max_len = 2;
    auto out = transliterate(ckpt, U"abc", opts);
    // EOS, UNK and 3 characters: 1 + 4 + 4 * 4 finished sequences.
    EXPECT_LE(out.size(), std::min<std::size_t>(10, 21));
    std::set<std::u32string> texts;
    for (const auto& t : out) EXPECT_TRUE(texts.insert(t.text).second);
  }
}

TEST(Transliterate, OutputsUseOnlyVocabularyGlyphs) {
  Rng rng(27);
  auto ckpt = random_checkpoint(rng, {U'X', U'Y'});
  for (const auto& t : transliterate(ckpt, U"a?b", BeamOptions{})) {
    for (char32_t ch : t.text)
      EXPECT_TRUE(ch == U'X' || ch == U'Y' || ch == kReplacementChar) << static_cast<int>(ch);
  }
  EXPECT_THROW(transliterate(ckpt, U"", BeamOptions{}), InvalidInputError);
}

TEST(Transliterate, ThreadCountDoesNotChangeResults) {
  Rng rng(28);
  auto ckpt = random_checkpoint(rng, {U'X', U'Y', U'Z', U'W'});
  std::vector<std::u32string> words{U"a", U"abc", U"dd", U"cab", U"bbbb", U"dcba", U"ad"};
  BeamOptions opts;
  opts.beam_width = 4;
  opts.n_best = 3;
  auto serial = transliterate_all(ckpt, words, opts, 1);
  auto parallel = transliterate_all(ckpt, words, opts, 3);
  ASSERT_EQ(serial.size(), words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    ASSERT_EQ(serial[i].size(), parallel[i].size());
    const auto direct = transliterate(ckpt, words[i], opts);
    ASSERT_EQ(direct.size(), serial[i].size());
    for (std::size_t k = 0; k < serial[i].size(); ++k) {
      EXPECT_EQ(serial[i][k].text, parallel[i][k].text);
      EXPECT_EQ(serial[i][k].log_prob, parallel[i][k].log_prob);
      EXPECT_EQ(serial[i][k].text, direct[k].text);
    }
  }
}

TEST(Transliterate, NbestRows) {
  std::vector<Transliteration> rows{{U"ab", -0.5, -0.25}, {U"b", -2.0, -1.0}};
  std::ostringstream out;
  write_nbest(out, U"src", rows);
  EXPECT_EQ(out.str(), "src\t1\tab\t-0.5\t-0.25\nsrc\t2\tb\t-2.0\t-1.0\n");
}

}  // namespace
}  // namespace translit
