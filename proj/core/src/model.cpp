// SPDX-License-Identifier: Apache-2.0
#include "translit/model.hpp"

#include <array>

#include "translit/errors.hpp"
#include "translit/ops.hpp"
#include "translit/random.hpp"

namespace translit {

namespace {

constexpr double kInitRange = 0.08;

void fill_uniform(Tensor& t, Rng& rng) {
  for (double& v : t.mutable_values()) v = rng.uniform(-kInitRange, kInitRange);
}

// Column t of a row-major [rows x length] id matrix.
std::vector<int> column(std::span<const int> ids, std::size_t rows, std::size_t length,
                        std::size_t t) {
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = ids[r * length + t];
  return out;
}

Tensor mask_column(std::span<const double> mask, std::size_t rows, std::size_t length,
                   std::size_t t) {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = mask[r * length + t];
  return Tensor(Shape{rows}, std::move(out));
}

// h_new where the mask is set, h_prev elsewhere.
Tensor masked_update(const Tensor& h_new, const Tensor& h_prev, const Tensor& m) {
  Tensor keep(m.shape(), 0.0);
  auto k = keep.mutable_values();
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = 1.0 - m[i];
  return add(mul_col(h_new, m), mul_col(h_prev, keep));
}

}  // namespace

GRUWeights GRUWeights::zeros(std::size_t input, std::size_t hidden) {
  GRUWeights w;
  w.input_update = w.input_reset = w.input_candidate = Tensor(Shape{input, hidden});
  w.hidden_update = w.hidden_reset = w.hidden_candidate = Tensor(Shape{hidden, hidden});
  w.bias_update = w.bias_reset = w.bias_candidate = Tensor(Shape{hidden});
  return w;
}

ModelParams ModelParams::zeros(const ModelDims& d) {
  if (d.src_vocab == 0 || d.tgt_vocab == 0 || d.embed == 0 || d.hidden == 0 || d.attention == 0)
    throw InvalidInputError("model dimensions must be positive");
  ModelParams p;
  p.dims = d;
  p.src_embed = Tensor(Shape{d.src_vocab, d.embed});
  p.tgt_embed = Tensor(Shape{d.tgt_vocab, d.embed});
  p.enc_fwd = GRUWeights::zeros(d.embed, d.hidden);
  p.enc_bwd = GRUWeights::zeros(d.embed, d.hidden);
  p.dec = GRUWeights::zeros(d.embed + d.context(), d.hidden);
  p.attn_query = Tensor(Shape{d.hidden, d.attention});
  p.attn_key = Tensor(Shape{d.context(), d.attention});
  p.attn_score = Tensor(Shape{d.attention});
  p.init_proj = Tensor(Shape{d.context(), d.hidden});
  p.out_proj = Tensor(Shape{d.hidden + d.context() + d.embed, d.tgt_vocab});
  p.out_bias = Tensor(Shape{d.tgt_vocab});
  return p;
}

ModelParams ModelParams::init(const ModelDims& dims, std::uint64_t seed) {
  ModelParams p = zeros(dims);
  Rng rng(seed);
  for (auto& [name, t] : p.named())
    if (t->rank() == 2 || name == "attn_score") fill_uniform(*t, rng);
  return p;
}

NamedTensors ModelParams::named() {
  NamedTensors out{{"src_embed", &src_embed}, {"tgt_embed", &tgt_embed}};
  auto gru = [&](const std::string& prefix, GRUWeights& w) {
    out.emplace_back(prefix + ".input_update", &w.input_update);
    out.emplace_back(prefix + ".input_reset", &w.input_reset);
    out.emplace_back(prefix + ".input_candidate", &w.input_candidate);
    out.emplace_back(prefix + ".hidden_update", &w.hidden_update);
    out.emplace_back(prefix + ".hidden_reset", &w.hidden_reset);
    out.emplace_back(prefix + ".hidden_candidate", &w.hidden_candidate);
    out.emplace_back(prefix + ".bias_update", &w.bias_update);
    out.emplace_back(prefix + ".bias_reset", &w.bias_reset);
    out.emplace_back(prefix + ".bias_candidate", &w.bias_candidate);
  };
  gru("enc_fwd", enc_fwd);
  gru("enc_bwd", enc_bwd);
  gru("dec", dec);
  out.emplace_back("attn_query", &attn_query);
  out.emplace_back("attn_key", &attn_key);
  out.emplace_back("attn_score", &attn_score);
  out.emplace_back("init_proj", &init_proj);
  out.emplace_back("out_proj", &out_proj);
  out.emplace_back("out_bias", &out_bias);
  return out;
}

ConstNamedTensors ModelParams::named() const {
  ConstNamedTensors out;
  for (auto& [name, t] : const_cast<ModelParams*>(this)->named()) out.emplace_back(name, t);
  return out;
}

Tensor gru_step(const GRUWeights& w, const Tensor& x, const Tensor& h_prev) {
  const std::size_t hidden = w.hidden_update.dim(0);
  if (x.cols() != w.input_update.dim(0) || h_prev.cols() != hidden || x.rows() != h_prev.rows() ||
      x.rank() != h_prev.rank())
    throw DimensionError("gru_step: input " + shape_string(x.shape()) + ", state " +
                         shape_string(h_prev.shape()) + " vs weights " +
                         shape_string(w.input_update.shape()));
  Tensor z = sigmoid(add_bias(add(matmul(x, w.input_update), matmul(h_prev, w.hidden_update)),
                              w.bias_update));
  Tensor r = sigmoid(
      add_bias(add(matmul(x, w.input_reset), matmul(h_prev, w.hidden_reset)), w.bias_reset));
  Tensor cand = tanh(add_bias(
      add(matmul(x, w.input_candidate), matmul(mul(r, h_prev), w.hidden_candidate)),
      w.bias_candidate));
  return add(mul(one_minus(z), h_prev), mul(z, cand));
}

ContextSet encode(const ModelParams& p, std::span<const int> src_ids,
                  std::span<const double> src_mask, std::size_t rows, std::size_t length) {
  if (rows == 0 || length == 0) throw InvalidInputError("encode: empty batch");
  if (src_ids.size() != rows * length || src_mask.size() != rows * length)
    throw DimensionError("encode: ids/mask do not match [" + std::to_string(rows) + "x" +
                         std::to_string(length) + "]");
  for (std::size_t r = 0; r < rows; ++r) {
    bool any = false;
    for (std::size_t t = 0; t < length; ++t) any = any || src_mask[r * length + t] != 0.0;
    if (!any) throw InvalidInputError("encode: source row " + std::to_string(r) + " is empty");
  }

  const std::size_t d = p.dims.hidden;
  std::vector<Tensor> embedded, masks;
  for (std::size_t t = 0; t < length; ++t) {
    embedded.push_back(gather_rows(p.src_embed, column(src_ids, rows, length, t)));
    masks.push_back(mask_column(src_mask, rows, length, t));
  }

  std::vector<Tensor> fwd(length), bwd(length);
  Tensor h(Shape{rows, d});
  for (std::size_t t = 0; t < length; ++t) {
    h = masked_update(gru_step(p.enc_fwd, embedded[t], h), h, masks[t]);
    fwd[t] = h;
  }
  h = Tensor(Shape{rows, d});
  for (std::size_t t = length; t-- > 0;) {
    h = masked_update(gru_step(p.enc_bwd, embedded[t], h), h, masks[t]);
    bwd[t] = h;
  }

  ContextSet ctx;
  ctx.rows = rows;
  ctx.length = length;
  ctx.mask = Tensor(Shape{rows, length}, std::vector<double>(src_mask.begin(), src_mask.end()));
  for (std::size_t t = 0; t < length; ++t) {
    std::array<Tensor, 2> halves{fwd[t], bwd[t]};
    ctx.states.push_back(mul_col(concat_cols(halves), masks[t]));
    ctx.keys.push_back(matmul(ctx.states.back(), p.attn_key));
  }
  return ctx;
}

ContextSet encode(const ModelParams& p, const Batch& batch) {
  return encode(p, batch.src_ids, batch.src_mask, batch.rows, batch.src_len);
}

Attention attend(const ModelParams& p, const Tensor& prev_hidden, const ContextSet& ctx) {
  if (prev_hidden.rank() != 2 || prev_hidden.rows() != ctx.rows ||
      prev_hidden.cols() != p.dims.hidden)
    throw DimensionError("attend: state " + shape_string(prev_hidden.shape()) +
                         " for a context of " + std::to_string(ctx.rows) + " rows");
  const Tensor query = matmul(prev_hidden, p.attn_query);
  const Tensor score_vec = reshape(p.attn_score, Shape{p.dims.attention, 1});
  std::vector<Tensor> scores;
  scores.reserve(ctx.length);
  for (std::size_t t = 0; t < ctx.length; ++t)
    scores.push_back(matmul(tanh(add(query, ctx.keys[t])), score_vec));
  Tensor alignment = masked_softmax(concat_cols(scores), ctx.mask);

  Tensor context = mul_col(ctx.states[0], slice_cols(alignment, 0, 1));
  for (std::size_t t = 1; t < ctx.length; ++t)
    context = add(context, mul_col(ctx.states[t], slice_cols(alignment, t, 1)));
  return {context, alignment};
}

DecoderState init_decoder(const ModelParams& p, const ContextSet& ctx) {
  std::vector<double> lengths(ctx.rows, 0.0);
  auto mv = ctx.mask.values();
  for (std::size_t r = 0; r < ctx.rows; ++r)
    for (std::size_t t = 0; t < ctx.length; ++t) lengths[r] += mv[r * ctx.length + t];
  for (double len : lengths)
    if (len == 0.0) throw InvalidInputError("init_decoder: empty source row");

  Tensor mean;
  for (std::size_t t = 0; t < ctx.length; ++t) {
    std::vector<double> w(ctx.rows);
    for (std::size_t r = 0; r < ctx.rows; ++r) w[r] = mv[r * ctx.length + t] / lengths[r];
    Tensor term = mul_col(ctx.states[t], Tensor(Shape{ctx.rows}, std::move(w)));
    mean = t == 0 ? term : add(mean, term);
  }
  return {tanh(matmul(mean, p.init_proj)), Tensor(Shape{ctx.rows, p.dims.context()})};
}

DecoderStepOutput decoder_step(const ModelParams& p, std::span<const int> prev_ids,
                               const DecoderState& state, const ContextSet& ctx) {
  if (prev_ids.size() != ctx.rows)
    throw DimensionError("decoder_step: " + std::to_string(prev_ids.size()) + " ids for " +
                         std::to_string(ctx.rows) + " rows");
  auto att = attend(p, state.hidden, ctx);
  Tensor embedded = gather_rows(p.tgt_embed, prev_ids);
  std::array<Tensor, 2> gru_in{embedded, att.context};
  Tensor hidden = gru_step(p.dec, concat_cols(gru_in), state.hidden);
  std::array<Tensor, 3> readout{hidden, att.context, embedded};
  Tensor logits = add_bias(matmul(concat_cols(readout), p.out_proj), p.out_bias);
  return {{hidden, att.context}, log_softmax(logits), att.alignment};
}

Tensor sequence_nll(const ModelParams& p, const Batch& batch) {
  const std::size_t tokens = batch.target_tokens();
  if (tokens == 0) throw InvalidInputError("sequence_nll: batch has no target tokens");
  ContextSet ctx = encode(p, batch);
  DecoderState state = init_decoder(p, ctx);

  std::vector<int> prev(batch.rows, kBos);
  Tensor total;
  for (std::size_t t = 0; t < batch.tgt_len; ++t) {
    auto step = decoder_step(p, prev, state, ctx);
    std::vector<int> gold(batch.rows);
    std::vector<double> weight(batch.rows);
    for (std::size_t r = 0; r < batch.rows; ++r) {
      gold[r] = batch.tgt_id(r, t);
      weight[r] = batch.tgt_mask[r * batch.tgt_len + t];
    }
    Tensor term = pick_sum(step.log_probs, gold, weight);
    total = t == 0 ? term : add(total, term);
    state = std::move(step.state);
    prev = std::move(gold);
  }
  return scale(total, -1.0 / static_cast<double>(tokens));
}

ContextSet repeat_row(const ContextSet& ctx, std::size_t row, std::size_t copies) {
  if (row >= ctx.rows) throw RangeError("repeat_row: row out of range");
  std::vector<int> ids(copies, static_cast<int>(row));
  ContextSet out;
  out.rows = copies;
  out.length = ctx.length;
  for (std::size_t t = 0; t < ctx.length; ++t) {
    out.states.push_back(gather_rows(ctx.states[t], ids));
    out.keys.push_back(gather_rows(ctx.keys[t], ids));
  }
  out.mask = gather_rows(ctx.mask, ids);
  return out;
}

DecoderState select_rows(const DecoderState& state, std::span<const std::size_t> rows) {
  std::vector<int> ids(rows.begin(), rows.end());
  return {gather_rows(state.hidden, ids), gather_rows(state.context, ids)};
}

}  // namespace translit
