// SPDX-License-Identifier: Apache-2.0
#include "translit/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "translit/corpus.hpp"
#include "translit/errors.hpp"
#include "translit/number_format.hpp"
#include "translit/unicode.hpp"

namespace translit {

namespace {

struct Normalized {
  std::vector<std::u32string> references;
  std::vector<std::u32string> candidates;
};

Normalized normalize_item(const EvalItem& item) {
  if (item.references.empty()) throw InvalidInputError("evaluation item has no references");
  Normalized n;
  std::unordered_set<std::u32string> seen;
  for (const auto& r : item.references) {
    auto s = nfc(r);
    if (seen.insert(s).second) n.references.push_back(std::move(s));
  }
  seen.clear();
  for (const auto& c : item.candidates) {
    auto s = nfc(c);
    if (seen.insert(s).second) n.candidates.push_back(std::move(s));
  }
  return n;
}

template <typename PerItem>
double mean_over(std::span<const EvalItem> items, PerItem per_item) {
  if (items.empty()) throw InvalidInputError("no evaluation items");
  double total = 0.0;
  for (const auto& item : items) total += per_item(normalize_item(item));
  return total / static_cast<double>(items.size());
}

bool matches_any(const std::u32string& c, const std::vector<std::u32string>& refs) {
  return std::find(refs.begin(), refs.end(), c) != refs.end();
}

double fscore_normalized(std::u32string_view candidate, const std::vector<std::u32string>& refs) {
  if (candidate.empty()) return 0.0;
  std::size_t best = 0;
  std::size_t best_ed = edit_distance(candidate, refs[0]);
  for (std::size_t i = 1; i < refs.size(); ++i) {
    const std::size_t ed = edit_distance(candidate, refs[i]);
    if (ed < best_ed) {
      best_ed = ed;
      best = i;
    }
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(refs[best].size());
  if (r == 0.0) return 0.0;
  const double lcs = (c + r - static_cast<double>(best_ed)) / 2.0;
  const double recall = lcs / r;
  const double precision = lcs / c;
  if (recall + precision == 0.0) return 0.0;
  return 2.0 * recall * precision / (recall + precision);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

struct RankedCandidate {
  long rank;
  std::u32string text;
};

// source -> candidates, in first-seen source order.
std::vector<std::pair<std::u32string, std::vector<RankedCandidate>>> read_nbest(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open n-best file " + path.string());
  std::vector<std::pair<std::u32string, std::vector<RankedCandidate>>> out;
  std::unordered_map<std::u32string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 5)
      throw ParseError("n-best row needs 5 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    if (fields[0].empty()) throw ParseError("empty source in n-best row", lineno);
    long rank = 0;
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), rank);
    if (ec != std::errc() || ptr != fields[1].data() + fields[1].size() || rank < 1)
      throw ParseError("bad rank '" + fields[1] + "'", lineno);
    auto source = utf8_to_u32(fields[0]);
    auto [it, fresh] = index.emplace(source, out.size());
    if (fresh) out.emplace_back(source, std::vector<RankedCandidate>{});
    out[it->second].second.push_back({rank, utf8_to_u32(fields[2])});
  }
  return out;
}

}  // namespace

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
      diag = up;
    }
  }
  return row[b.size()];
}

double acc(std::span<const EvalItem> items) {
  return mean_over(items, [](const Normalized& n) {
    return !n.candidates.empty() && matches_any(n.candidates[0], n.references) ? 1.0 : 0.0;
  });
}

double lcs_fscore(std::u32string_view candidate, std::span<const std::u32string> references) {
  if (references.empty()) throw InvalidInputError("lcs_fscore needs at least one reference");
  std::vector<std::u32string> refs;
  for (const auto& r : references) refs.push_back(nfc(r));
  return fscore_normalized(nfc(candidate), refs);
}

double mean_fscore(std::span<const EvalItem> items) {
  return mean_over(items, [](const Normalized& n) {
    return n.candidates.empty() ? 0.0 : fscore_normalized(n.candidates[0], n.references);
  });
}

double mrr(std::span<const EvalItem> items) {
  return mean_over(items, [](const Normalized& n) {
    for (std::size_t k = 0; k < n.candidates.size(); ++k)
      if (matches_any(n.candidates[k], n.references)) return 1.0 / static_cast<double>(k + 1);
    return 0.0;
  });
}

double map_metric(std::span<const EvalItem> items) {
  return mean_over(items, [](const Normalized& n) {
    const std::size_t m = n.references.size();
    std::vector<bool> matched(m, false);
    std::size_t hits = 0;
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k < n.candidates.size()) {
        auto it = std::find(n.references.begin(), n.references.end(), n.candidates[k]);
        if (it != n.references.end()) {
          auto idx = static_cast<std::size_t>(it - n.references.begin());
          if (!matched[idx]) {
            matched[idx] = true;
            ++hits;
          }
        }
      }
      total += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
    return total / static_cast<double>(m);
  });
}

MetricsReport compute_report(std::span<const EvalItem> items) {
  return {acc(items), mean_fscore(items), mrr(items), map_metric(items), items.size()};
}

MetricsReport score_file(const std::filesystem::path& nbest_path,
                         const std::filesystem::path& reference_path, std::size_t cutoff) {
  auto references = load_corpus(reference_path);
  std::sort(references.begin(), references.end(),
            [](const SequencePair& a, const SequencePair& b) { return a.source < b.source; });
  auto nbest = read_nbest(nbest_path);

  std::unordered_map<std::u32string, std::size_t> by_source;
  for (std::size_t i = 0; i < nbest.size(); ++i) by_source.emplace(nbest[i].first, i);
  std::unordered_set<std::u32string> ref_sources;
  for (const auto& p : references) ref_sources.insert(p.source);

  std::vector<std::string> offenders;
  for (const auto& p : references)
    if (!by_source.count(p.source)) offenders.push_back("missing from n-best: " + u32_to_utf8(p.source));
  for (const auto& [source, cands] : nbest)
    if (!ref_sources.count(source)) offenders.push_back("missing from references: " + u32_to_utf8(source));
  if (!offenders.empty()) {
    std::string msg = "n-best and reference files do not align:";
    for (const auto& o : offenders) msg += "\n  " + o;
    throw AlignmentError(msg);
  }
  if (references.empty()) throw InvalidInputError("reference file has no entries");

  std::vector<EvalItem> items;
  for (const auto& p : references) {
    auto cands = nbest[by_source.at(p.source)].second;
    std::stable_sort(cands.begin(), cands.end(),
                     [](const RankedCandidate& a, const RankedCandidate& b) { return a.rank < b.rank; });
    EvalItem item{p.targets, {}};
    for (std::size_t k = 0; k < cands.size() && k < cutoff; ++k)
      item.candidates.push_back(std::move(cands[k].text));
    items.push_back(std::move(item));
  }
  return compute_report(items);
}

std::string report_csv(const MetricsReport& r) {
  return "acc," + format_number(r.acc) + "\nfscore," + format_number(r.fscore) + "\nmrr," +
         format_number(r.mrr) + "\nmap," + format_number(r.map) + "\n";
}

std::string report_text(const MetricsReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "items    %zu\nACC      %.4f\nF-score  %.4f\nMRR      %.4f\nMAP      %.4f\n"
                "(candidates deduplicated after NFC normalization)\n",
                r.item_count, r.acc, r.fscore, r.mrr, r.map);
  return buf;
}

}  // namespace translit
