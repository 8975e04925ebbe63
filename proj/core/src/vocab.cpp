// SPDX-License-Identifier: Apache-2.0
#include "translit/vocab.hpp"

#include "translit/corpus.hpp"
#include "translit/errors.hpp"
#include "translit/unicode.hpp"

namespace translit {

Vocabulary::Vocabulary(std::vector<char32_t> symbols) : symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto [it, inserted] = ids_.emplace(symbols_[i], static_cast<int>(i) + kReservedCount);
    if (!inserted) throw InvalidInputError("duplicate vocabulary symbol");
  }
}

Vocabulary Vocabulary::build(std::span<const SequencePair> pairs, Side side) {
  std::vector<char32_t> symbols;
  std::unordered_map<char32_t, int> seen;
  auto visit = [&](const std::u32string& s) {
    for (char32_t c : s)
      if (seen.emplace(c, 0).second) symbols.push_back(c);
  };
  for (const auto& p : pairs) {
    if (side == Side::source) {
      visit(p.source);
    } else {
      for (const auto& t : p.targets) visit(t);
    }
  }
  return Vocabulary(std::move(symbols));
}

std::optional<int> Vocabulary::find(char32_t c) const {
  auto it = ids_.find(c);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::id_of(char32_t c) const { return find(c).value_or(kUnk); }

char32_t Vocabulary::char_of(int id) const {
  if (id < kReservedCount || static_cast<std::size_t>(id) >= size())
    throw RangeError("no character for id " + std::to_string(id) + " (vocabulary size " +
                     std::to_string(size()) + ")");
  return symbols_[static_cast<std::size_t>(id - kReservedCount)];
}

std::vector<int> encode_sequence(const Vocabulary& v, std::u32string_view s, bool add_eos) {
  std::vector<int> ids;
  ids.reserve(s.size() + 1);
  for (char32_t c : s) ids.push_back(v.id_of(c));
  if (add_eos) ids.push_back(kEos);
  return ids;
}

std::u32string decode_sequence(const Vocabulary& v, std::span<const int> ids) {
  std::u32string out;
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= v.size())
      throw RangeError("id " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(v.size()));
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(id == kUnk ? kReplacementChar : v.char_of(id));
  }
  return out;
}

}  // namespace translit
