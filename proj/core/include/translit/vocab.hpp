// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace translit {

struct SequencePair;

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kReservedCount = 4;

enum class Side { source, target };

/// Character <-> id bijection. Ids 0..3 are PAD, BOS, EOS, UNK; corpus
/// characters follow in first-seen order.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Symbols become ids 4, 5, ... in the given order. Duplicates rejected.
  explicit Vocabulary(std::vector<char32_t> symbols);

  static Vocabulary build(std::span<const SequencePair> pairs, Side side);

  std::size_t size() const { return symbols_.size() + kReservedCount; }
  /// Non-reserved symbols in id order.
  const std::vector<char32_t>& symbols() const { return symbols_; }

  std::optional<int> find(char32_t c) const;
  /// Id of c, or UNK.
  int id_of(char32_t c) const;
  /// Character of a non-reserved id. Throws RangeError otherwise.
  char32_t char_of(int id) const;

  bool operator==(const Vocabulary& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<char32_t> symbols_;
  std::unordered_map<char32_t, int> ids_;
};

/// Unknown characters map to UNK; EOS appended when requested.
std::vector<int> encode_sequence(const Vocabulary& v, std::u32string_view s, bool add_eos);

/// Stops at the first EOS, drops PAD and BOS, renders UNK as U+FFFD.
std::u32string decode_sequence(const Vocabulary& v, std::span<const int> ids);

}  // namespace translit
