// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Training artifacts go to a scratch directory under the system
// temp path (or argv[1] when given).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/toy_tasks.hpp"
#include "translit/ops.hpp"
#include "translit/tape.hpp"
#include "translit/training.hpp"

namespace fs = std::filesystem;
using namespace translit;
using namespace translit::testing;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  ModelParams p = random_params(tiny_dims(10, 12), rng);
  const std::vector<EncodedPair> examples{{{4, 5, 6, 9}, {7, 11, 4, kEos}},
                                          {{9, 8, 7}, {5, 10, 6, 8, kEos}}};
  const Batch batch = batch_of(examples);
  Tape tape;
  ModelParams watched = p;
  Tensor loss;
  {
    TapeScope scope(tape);
    for (auto& [name, t] : watched.named()) *t = tape.watch(*t);
    loss = sequence_nll(watched, batch);
  }
  const auto grads = backward(tape, loss);
  auto w = watched.named();
  auto plain = p.named();
  double worst = 0.0;
  std::string worst_name;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    const auto analytic = grads.of(*w[i].second);
    const auto numeric =
        central_differences(plain[i].second, [&] { return sequence_nll(p, batch).item(); });
    const double err = relative_error(analytic.values(), numeric);
    if (err > worst) worst = err, worst_name = plain[i].first;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0,
          std::to_string(plain.size()) + " tensors, max rel err " + fmt("%.2e", worst) + " (" +
              worst_name + "), " + fmt("%.1f", secs) + " s"};
}

Verdict attention_distribution() {
  Rng rng(202);
  double worst_sum = 0.0;
  std::size_t masked_nonzero = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    const ModelParams p = random_params(tiny_dims(), rng, 2.0);
    const std::size_t rows = 1 + rng.below(3), len = 1 + rng.below(7);
    std::vector<int> ids(rows * len, kPad);
    std::vector<double> mask(rows * len, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t n = 1 + rng.below(len);
      for (std::size_t t = 0; t < n; ++t) {
        ids[r * len + t] = kReservedCount + static_cast<int>(rng.below(6));
        mask[r * len + t] = 1.0;
      }
    }
    const ContextSet ctx = encode(p, ids, mask, rows, len);
    const auto att = attend(p, random_tensor({rows, p.dims.hidden}, rng), ctx);
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        total += att.alignment.at(r, t);
        if (mask[r * len + t] == 0.0 && att.alignment.at(r, t) != 0.0) ++masked_nonzero;
      }
      worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
  }
  return {worst_sum <= 1e-9 && masked_nonzero == 0,
          "1000 draws, max |sum - 1| " + fmt("%.1e", worst_sum) + ", nonzero masked weights " +
              std::to_string(masked_nonzero)};
}

Verdict beam_greedy() {
  Rng rng(303);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelParams p = random_params(tiny_dims(9, 4 + 2 + rng.below(6)), rng, 1.0);
    const auto src = random_ids(rng, 1 + rng.below(6), 9);
    BeamOptions opts;
    opts.beam_width = 1;
    opts.n_best = 1;
    const auto beam = beam_search(p, src, opts);
    const auto greedy = greedy_decode(p, src, 0);
    if (beam.size() != 1 || beam[0].ids != greedy.ids || beam[0].log_prob != greedy.log_prob)
      ++mismatches;
  }
  return {mismatches == 0, "100 models, " + std::to_string(mismatches) + " mismatches"};
}

Verdict beam_optimality() {
  Rng rng(404);
  int mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    // Four expandable symbols: EOS, UNK and two characters.
    const ModelParams p = random_params(tiny_dims(9, kReservedCount + 2), rng, 1.5);
    const auto src = random_ids(rng, 1 + rng.below(5), 9);
    BeamOptions opts;
    opts.beam_width = 64;
    opts.n_best = 1;
    opts.max_len = 3;
    const auto beam = beam_search(p, src, opts);
    const auto best = enumerate_best(p, src, 3);
    if (beam.empty() || beam[0].ids != best.ids) ++mismatches;
  }
  return {mismatches == 0, "50 models, " + std::to_string(mismatches) + " mismatches"};
}

struct ToyRun {
  TrainResult result;
  MetricsReport dev;
  fs::path curve, checkpoint, steps;
  double seconds = 0.0;
};

ToyRun run_toy(const std::vector<SequencePair>& all, const TrainConfig& base, const fs::path& dir,
               const std::string& tag) {
  const std::vector<SequencePair> train_set(all.begin(), all.begin() + 1800);
  const std::vector<SequencePair> dev(all.begin() + 1800, all.end());
  ToyRun run;
  TrainConfig cfg = base;
  run.curve = cfg.curve_path = dir / (tag + ".curve.csv");
  run.checkpoint = cfg.checkpoint_path = dir / (tag + ".ckpt");
  run.steps = cfg.step_log_path = dir / (tag + ".steps.csv");
  const auto t0 = std::chrono::steady_clock::now();
  run.result = train(cfg, train_set, dev);
  run.dev = evaluate(load_checkpoint(run.checkpoint), dev, BeamOptions{});
  run.seconds = seconds_since(t0);
  return run;
}

TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.hidden = 64;
  return cfg;
}

std::string run_summary(const ToyRun& r) {
  return "best epoch " + std::to_string(r.result.best_epoch) + " of " +
         std::to_string(r.result.curve.size()) + ", " + fmt("%.0f", r.seconds) + " s";
}

Verdict overfit() {
  const auto pairs = cipher_task(32, 7);
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.patience = 200;
  cfg.dev_beam = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = train(cfg, pairs, pairs);
  const double nll = result.curve.back().train_nll;
  return {result.curve.size() == 200 && nll < 0.05,
          "epoch " + std::to_string(result.curve.size()) + " train NLL " + fmt("%.4f", nll) + ", " +
              fmt("%.0f", seconds_since(t0)) + " s"};
}

Verdict metric_oracles() {
  Rng rng(808);
  int exact_fail = 0, close_fail = 0, order_fail = 0;
  double worst_f = 0.0, worst_map = 0.0;
  for (int fixture = 0; fixture < 200; ++fixture) {
    const auto items = random_eval_items(rng, 20);
    const auto r = compute_report(items);
    if (r.acc != brute_acc(items) || r.mrr != brute_mrr(items)) ++exact_fail;
    const double df = std::abs(r.fscore - brute_fscore(items));
    const double dm = std::abs(r.map - brute_map(items));
    worst_f = std::max(worst_f, df);
    worst_map = std::max(worst_map, dm);
    if (df > 1e-12 || dm > 1e-12) ++close_fail;
    if (r.mrr < r.acc || r.fscore < r.acc) ++order_fail;
  }
  return {exact_fail == 0 && close_fail == 0 && order_fail == 0,
          "200 fixtures, exact mismatches " + std::to_string(exact_fail) + ", F/MAP max diff " +
              fmt("%.1e", std::max(worst_f, worst_map)) + ", inequality violations " +
              std::to_string(order_fail)};
}

Verdict map_acc_identity(const ToyRun& copy, const ToyRun& cipher) {
  Rng rng(909);
  int violations = 0;
  for (int fixture = 0; fixture < 200; ++fixture) {
    const auto items = random_eval_items(rng, 1 + rng.below(40), 1);
    if (map_metric(items) != acc(items)) ++violations;
  }
  const bool decoded_ok = copy.dev.map == copy.dev.acc && cipher.dev.map == cipher.dev.acc;
  return {violations == 0 && decoded_ok,
          "200 random fixtures, " + std::to_string(violations) +
              " violations; decoded dev sets MAP==ACC: " + (decoded_ok ? "yes" : "no")};
}

Verdict determinism(const ToyRun& a, const ToyRun& b) {
  const bool curve_same = slurp(a.curve) == slurp(b.curve) && !slurp(a.curve).empty();
  const bool ckpt_same = slurp(a.checkpoint) == slurp(b.checkpoint) && !slurp(a.checkpoint).empty();
  return {curve_same && ckpt_same, std::string("copy task twice with seed 1: curve ") +
                                       (curve_same ? "identical" : "differs") + ", checkpoint " +
                                       (ckpt_same ? "identical" : "differs")};
}

Verdict clipping(const std::vector<const ToyRun*>& runs) {
  std::size_t steps = 0, clipped = 0, violations = 0;
  double worst = 0.0;
  for (const ToyRun* r : runs) {
    std::istringstream in(slurp(r->steps));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      // epoch,batch,loss,grad_norm,clipped_norm
      std::vector<std::string> cols;
      std::istringstream fields(line);
      for (std::string f; std::getline(fields, f, ',');) cols.push_back(f);
      const double pre = std::stod(cols.at(3));
      const double post = std::stod(cols.at(4));
      ++steps;
      if (pre > 1.0) ++clipped;
      if (post > 1.0 + 1e-9) ++violations;
      worst = std::max(worst, post);
    }
  }
  return {steps > 0 && violations == 0,
          std::to_string(steps) + " logged steps (" + std::to_string(clipped) +
              " clipped), max post-clip norm " + fmt("%.12f", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "translit_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  int failures = 0;
  auto report = [&](int n, const char* name, const std::function<Verdict()>& check) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "gradient correctness", gradient_check);
  report(2, "attention distribution", attention_distribution);
  report(3, "beam/greedy equivalence", beam_greedy);
  report(4, "beam optimality on small spaces", beam_optimality);

  ToyRun copy_a, copy_b, cipher;
  report(5, "toy copy task", [&] {
    copy_a = run_toy(copy_task(2000, 42), toy_config(), dir, "copy_a");
    return Verdict{copy_a.dev.acc >= 0.95,
                   "dev ACC " + fmt("%.4f", copy_a.dev.acc) + ", " + run_summary(copy_a)};
  });
  report(6, "toy cipher transliteration", [&] {
    cipher = run_toy(cipher_task(2000, 43), toy_config(), dir, "cipher");
    return Verdict{cipher.dev.acc >= 0.90 && cipher.dev.fscore >= 0.97,
                   "dev ACC " + fmt("%.4f", cipher.dev.acc) + ", F-score " +
                       fmt("%.4f", cipher.dev.fscore) + ", " + run_summary(cipher)};
  });
  report(7, "overfit check", overfit);
  report(8, "metric oracle equivalence", metric_oracles);
  report(9, "MAP/ACC identity", [&] { return map_acc_identity(copy_a, cipher); });
  report(10, "determinism", [&] {
    copy_b = run_toy(copy_task(2000, 42), toy_config(), dir, "copy_b");
    return determinism(copy_a, copy_b);
  });
  report(11, "clipping", [&] { return clipping({&copy_a, &copy_b, &cipher}); });

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
