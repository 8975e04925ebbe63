// SPDX-License-Identifier: Apache-2.0
#include "translit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "translit/errors.hpp"
#include "translit/unicode.hpp"

namespace translit {

std::vector<SequencePair> parse_corpus(std::istream& in) {
  std::vector<SequencePair> pairs;
  std::unordered_map<std::u32string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::u32string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(utf8_to_u32(std::string_view(line).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2) throw ParseError("expected source<TAB>target", lineno);
    for (const auto& f : fields)
      if (f.empty()) throw ParseError("empty field", lineno);

    auto [it, fresh] = index.emplace(fields[0], pairs.size());
    if (fresh) pairs.push_back(SequencePair{fields[0], {}});
    auto& targets = pairs[it->second].targets;
    for (std::size_t i = 1; i < fields.size(); ++i)
      if (std::find(targets.begin(), targets.end(), fields[i]) == targets.end())
        targets.push_back(std::move(fields[i]));
  }
  return pairs;
}

std::vector<SequencePair> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<SequencePair>& pairs) {
  for (const auto& p : pairs) {
    out << u32_to_utf8(p.source);
    for (const auto& t : p.targets) out << '\t' << u32_to_utf8(t);
    out << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const std::vector<SequencePair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  write_corpus(out, pairs);
}

}  // namespace translit
