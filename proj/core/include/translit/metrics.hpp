// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace translit {

/// References and the ranked candidate list for one source.
struct EvalItem {
  std::vector<std::u32string> references;
  std::vector<std::u32string> candidates;
};

struct MetricsReport {
  double acc = 0.0;
  double fscore = 0.0;
  double mrr = 0.0;
  double map = 0.0;
  std::size_t item_count = 0;
};

inline constexpr std::size_t kDefaultCutoff = 10;

// Strings are compared after NFC normalization, and repeated candidates
// (after normalization) are dropped keeping the first occurrence. Every
// aggregate throws InvalidInputError on an empty item set or an item
// without references.

/// Unit-cost Levenshtein distance over code points.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

/// Fraction of items whose top candidate matches some reference.
double acc(std::span<const EvalItem> items);

/// LCS-based F-score of one candidate against the closest reference (by
/// edit distance), with LCS = (|c| + |r| - ED) / 2.
double lcs_fscore(std::u32string_view candidate, std::span<const std::u32string> references);

/// Mean lcs_fscore of the top candidate (0 for an empty list).
double mean_fscore(std::span<const EvalItem> items);

/// Mean reciprocal rank of the first correct candidate.
double mrr(std::span<const EvalItem> items);

/// Mean over items of (1/m) * sum_{k=1..m} precision@k, where m is the
/// number of references and precision@k counts distinct references matched
/// in the top k candidates.
double map_metric(std::span<const EvalItem> items);

MetricsReport compute_report(std::span<const EvalItem> items);

/// Joins an n-best TSV with a reference TSV by source, keeps the first
/// `cutoff` ranks, and scores items in source order so that row order in
/// either file does not matter. Throws AlignmentError naming sources that
/// appear in only one file.
MetricsReport score_file(const std::filesystem::path& nbest_path,
                         const std::filesystem::path& reference_path,
                         std::size_t cutoff = kDefaultCutoff);

/// `metric,value` rows for acc, fscore, mrr, map.
std::string report_csv(const MetricsReport& report);
/// Human-readable aligned table.
std::string report_text(const MetricsReport& report);

}  // namespace translit
