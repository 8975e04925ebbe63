// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace translit {

/// One source name with every accepted transliteration of it.
struct SequencePair {
  std::u32string source;
  std::vector<std::u32string> targets;

  bool operator==(const SequencePair&) const = default;
};

/// Parses `source<TAB>ref1[<TAB>ref2...]` lines. Blank and `#` lines are
/// skipped; repeated sources are merged in first-seen order with the union
/// of their references. Throws ParseError with the offending line number.
std::vector<SequencePair> parse_corpus(std::istream& in);
std::vector<SequencePair> load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const std::vector<SequencePair>& pairs);
void save_corpus(const std::filesystem::path& path, const std::vector<SequencePair>& pairs);

}  // namespace translit
