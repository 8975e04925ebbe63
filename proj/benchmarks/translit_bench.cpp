// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "translit/batch.hpp"
#include "translit/decoding.hpp"
#include "translit/model.hpp"
#include "translit/ops.hpp"
#include "translit/optim.hpp"
#include "translit/random.hpp"
#include "translit/tape.hpp"

namespace {

using namespace translit;

Tensor uniform(Shape shape, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.mutable_values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

ModelDims default_dims() {
  ModelDims d;
  d.src_vocab = 40;
  d.tgt_vocab = 40;
  return d;
}

std::vector<int> word(Rng& rng, std::size_t len, std::size_t vocab) {
  std::vector<int> ids(len);
  for (int& id : ids) id = kReservedCount + static_cast<int>(rng.below(vocab - kReservedCount));
  return ids;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = uniform({n, n}, rng), b = uniform({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128)->Arg(256);

void BM_GruStep(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const ModelParams p = ModelParams::init(default_dims(), 2);
  Rng rng(2);
  const Tensor x = uniform({rows, p.dims.embed}, rng);
  const Tensor h = uniform({rows, p.dims.hidden}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gru_step(p.enc_fwd, x, h));
}
BENCHMARK(BM_GruStep)->Arg(1)->Arg(32);

void BM_BeamSearch(benchmark::State& state) {
  const ModelParams p = ModelParams::init(default_dims(), 3);
  Rng rng(3);
  const auto src = word(rng, 8, p.dims.src_vocab);
  BeamOptions opts;
  opts.beam_width = static_cast<std::size_t>(state.range(0));
  opts.n_best = opts.beam_width;
  opts.max_len = 12;
  for (auto _ : state) benchmark::DoNotOptimize(beam_search(p, src, opts));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  ModelParams p = ModelParams::init(default_dims(), 4);
  Rng rng(4);
  std::vector<EncodedPair> examples(32);
  for (auto& e : examples) {
    e.source = word(rng, 3 + rng.below(6), p.dims.src_vocab);
    e.target = word(rng, 3 + rng.below(6), p.dims.tgt_vocab);
    e.target.push_back(kEos);
  }
  std::vector<std::size_t> all(examples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Batch batch = make_batch(examples, all);
  AdamState adam;
  for (auto _ : state) {
    Tape tape;
    ModelParams watched = p;
    Tensor loss;
    {
      TapeScope scope(tape);
      for (auto& [name, t] : watched.named()) *t = tape.watch(*t);
      loss = sequence_nll(watched, batch);
    }
    const auto grads = backward(tape, loss);
    std::vector<Tensor> g;
    std::vector<Tensor*> params;
    auto w = watched.named();
    auto plain = p.named();
    for (std::size_t i = 0; i < w.size(); ++i) {
      g.push_back(grads.of(*w[i].second));
      params.push_back(plain[i].second);
    }
    adam_update(adam, params, clip_global_norm(std::move(g), 1.0));
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
