// SPDX-License-Identifier: Apache-2.0
// Synthetic corpora for end-to-end runs.
#pragma once

#include <set>
#include <string>
#include <vector>

#include "translit/corpus.hpp"
#include "translit/random.hpp"

namespace translit::testing {

inline const std::u32string kToyAlphabet = U"abcdefghij";

/// `count` distinct random strings of length [min_len, max_len].
inline std::vector<std::u32string> random_strings(std::size_t count, std::size_t min_len,
                                                  std::size_t max_len, std::uint64_t seed,
                                                  const std::u32string& alphabet = kToyAlphabet) {
  Rng rng(seed);
  std::set<std::u32string> seen;
  std::vector<std::u32string> out;
  while (out.size() < count) {
    const std::size_t len = min_len + rng.below(max_len - min_len + 1);
    std::u32string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.below(alphabet.size())]);
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<SequencePair> copy_task(std::size_t count, std::uint64_t seed) {
  std::vector<SequencePair> pairs;
  for (auto& s : random_strings(count, 3, 8, seed)) pairs.push_back({s, {s}});
  return pairs;
}

/// Left-to-right monotone cipher: letters a..j map to K..T, except three
/// digraphs that are rewritten as a unit: "ab" -> "X", "ch" -> "W",
/// "ee" -> "Y".
inline std::u32string toy_cipher(const std::u32string& s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    if (i + 1 < s.size()) {
      const std::u32string pair = s.substr(i, 2);
      if (pair == U"ab") { out += U'X'; i += 2; continue; }
      if (pair == U"ch") { out += U'W'; i += 2; continue; }
      if (pair == U"ee") { out += U'Y'; i += 2; continue; }
    }
    out += static_cast<char32_t>(U'K' + (s[i] - U'a'));
    ++i;
  }
  return out;
}

inline std::vector<SequencePair> cipher_task(std::size_t count, std::uint64_t seed) {
  std::vector<SequencePair> pairs;
  for (auto& s : random_strings(count, 3, 8, seed)) pairs.push_back({s, {toy_cipher(s)}});
  return pairs;
}

}  // namespace translit::testing
