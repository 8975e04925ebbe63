// SPDX-License-Identifier: Apache-2.0
#include "translit/decoding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "translit/errors.hpp"
#include "translit/number_format.hpp"
#include "translit/unicode.hpp"

namespace translit {

namespace {

bool expandable(int id) { return id != kPad && id != kBos; }

void check_options(std::span<const int> source_ids, const BeamOptions& opts) {
  if (source_ids.empty()) throw InvalidInputError("cannot decode an empty source");
  if (opts.beam_width < 1) throw InvalidInputError("beam_width must be at least 1");
  if (opts.n_best < 1 || opts.n_best > opts.beam_width)
    throw InvalidInputError("n_best must be in [1, beam_width]");
}

ContextSet encode_single(const ModelParams& p, std::span<const int> source_ids) {
  std::vector<double> mask(source_ids.size(), 1.0);
  return encode(p, source_ids, mask, 1, source_ids.size());
}

struct Expansion {
  double score;
  std::size_t parent;
  int token;
};

}  // namespace

std::size_t default_max_len(std::size_t source_length) { return 3 * source_length + 5; }

double Hypothesis::normalized() const {
  return ids.empty() ? log_prob : log_prob / static_cast<double>(ids.size());
}

std::vector<Hypothesis> beam_search(const ModelParams& p, std::span<const int> source_ids,
                                    const BeamOptions& opts) {
  check_options(source_ids, opts);
  const std::size_t max_len = opts.max_len ? opts.max_len : default_max_len(source_ids.size());
  const std::size_t vocab = p.dims.tgt_vocab;

  const ContextSet ctx = encode_single(p, source_ids);
  DecoderState state = init_decoder(p, ctx);
  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Hypothesis> finished;

  for (std::size_t step = 1; step <= max_len; ++step) {
    std::vector<int> prev;
    for (const auto& h : live) prev.push_back(h.ids.empty() ? kBos : h.ids.back());
    auto out = decoder_step(p, prev, state, repeat_row(ctx, 0, live.size()));
    auto lp = out.log_probs.values();

    std::vector<Expansion> cands;
    cands.reserve(live.size() * vocab);
    for (std::size_t i = 0; i < live.size(); ++i)
      for (std::size_t tok = 0; tok < vocab; ++tok)
        if (expandable(static_cast<int>(tok)))
          cands.push_back({live[i].log_prob + lp[i * vocab + tok], i, static_cast<int>(tok)});
    const std::size_t keep = std::min(opts.beam_width - finished.size(), cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Expansion& a, const Expansion& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });

    std::vector<Hypothesis> next;
    std::vector<std::size_t> parents;
    for (std::size_t k = 0; k < keep; ++k) {
      const auto& c = cands[k];
      Hypothesis h;
      h.ids = live[c.parent].ids;
      h.ids.push_back(c.token);
      h.log_prob = c.score;
      if (c.token == kEos) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
        parents.push_back(c.parent);
      }
    }
    if (finished.size() >= opts.beam_width || next.empty()) break;
    if (step == max_len) {
      for (auto& h : next) {
        h.finished = true;
        finished.push_back(std::move(h));
      }
      break;
    }
    state = select_rows(out.state, parents);
    live = std::move(next);
  }

  std::sort(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) {
    const double na = a.normalized(), nb = b.normalized();
    if (na != nb) return na > nb;
    return a.ids < b.ids;
  });
  if (finished.size() > opts.n_best) finished.resize(opts.n_best);
  return finished;
}

Hypothesis greedy_decode(const ModelParams& p, std::span<const int> source_ids,
                         std::size_t max_len) {
  if (source_ids.empty()) throw InvalidInputError("cannot decode an empty source");
  if (max_len == 0) max_len = default_max_len(source_ids.size());
  const ContextSet ctx = encode_single(p, source_ids);
  DecoderState state = init_decoder(p, ctx);
  Hypothesis h;
  int prev = kBos;
  while (h.ids.size() < max_len) {
    auto out = decoder_step(p, std::span<const int>(&prev, 1), state, ctx);
    auto lp = out.log_probs.values();
    int best = -1;
    for (std::size_t tok = 0; tok < lp.size(); ++tok)
      if (expandable(static_cast<int>(tok)) && (best < 0 || lp[tok] > lp[static_cast<std::size_t>(best)]))
        best = static_cast<int>(tok);
    h.ids.push_back(best);
    h.log_prob += lp[static_cast<std::size_t>(best)];
    state = std::move(out.state);
    prev = best;
    if (best == kEos) break;
  }
  h.finished = true;
  return h;
}

std::vector<Transliteration> transliterate(const Checkpoint& ckpt, std::u32string_view source,
                                           const BeamOptions& opts) {
  if (source.empty()) throw InvalidInputError("cannot transliterate an empty string");
  const auto ids = encode_sequence(ckpt.src_vocab, source, false);
  std::vector<Transliteration> out;
  for (const auto& h : beam_search(ckpt.params, ids, opts))
    out.push_back({decode_sequence(ckpt.tgt_vocab, h.ids), h.log_prob, h.normalized()});
  std::stable_sort(out.begin(), out.end(), [](const Transliteration& a, const Transliteration& b) {
    if (a.normalized != b.normalized) return a.normalized > b.normalized;
    return a.text < b.text;
  });
  return out;
}

std::vector<std::vector<Transliteration>> transliterate_all(const Checkpoint& ckpt,
                                                            std::span<const std::u32string> sources,
                                                            const BeamOptions& opts,
                                                            std::size_t jobs) {
  std::vector<std::vector<Transliteration>> results(sources.size());
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(sources.size(), 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < sources.size(); ++i)
      results[i] = transliterate(ckpt, sources[i], opts);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < sources.size(); i = next++) {
        try {
          results[i] = transliterate(ckpt, sources[i], opts);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

void write_nbest(std::ostream& out, std::u32string_view source,
                 std::span<const Transliteration> results) {
  const std::string src = u32_to_utf8(source);
  for (std::size_t i = 0; i < results.size(); ++i)
    out << src << '\t' << (i + 1) << '\t' << u32_to_utf8(results[i].text) << '\t'
        << format_number(results[i].log_prob) << '\t' << format_number(results[i].normalized)
        << '\n';
}

}  // namespace translit
