// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "translit/batch.hpp"
#include "translit/tensor.hpp"

namespace translit {

struct ModelDims {
  std::size_t src_vocab = 0;
  std::size_t tgt_vocab = 0;
  std::size_t embed = 64;
  std::size_t hidden = 128;  // per encoder direction, and the decoder
  std::size_t attention = 128;

  std::size_t context() const { return 2 * hidden; }
  bool operator==(const ModelDims&) const = default;
};

/// Update gate, reset gate and candidate weights of one GRU.
struct GRUWeights {
  Tensor input_update, input_reset, input_candidate;     // [input x hidden]
  Tensor hidden_update, hidden_reset, hidden_candidate;  // [hidden x hidden]
  Tensor bias_update, bias_reset, bias_candidate;        // [hidden]

  static GRUWeights zeros(std::size_t input, std::size_t hidden);
};

using NamedTensors = std::vector<std::pair<std::string, Tensor*>>;
using ConstNamedTensors = std::vector<std::pair<std::string, const Tensor*>>;

/// Every learned weight of the encoder-decoder.
struct ModelParams {
  ModelDims dims;
  Tensor src_embed;  // [src_vocab x embed]
  Tensor tgt_embed;  // [tgt_vocab x embed]
  GRUWeights enc_fwd;
  GRUWeights enc_bwd;
  GRUWeights dec;       // input is [embedding | context]
  Tensor attn_query;    // [hidden x attention]
  Tensor attn_key;      // [context x attention]
  Tensor attn_score;    // [attention]
  Tensor init_proj;     // [context x hidden]
  Tensor out_proj;      // [(hidden + context + embed) x tgt_vocab]
  Tensor out_bias;      // [tgt_vocab]

  /// All-zero parameters of the right shapes.
  static ModelParams zeros(const ModelDims& dims);
  /// Matrices uniform in (-0.08, 0.08), biases zero.
  static ModelParams init(const ModelDims& dims, std::uint64_t seed);

  /// Stable, serialization order.
  NamedTensors named();
  ConstNamedTensors named() const;
};

/// Encoder outputs for a batch: one [rows x context] tensor per source
/// position, the attention keys derived from them, and the source mask.
struct ContextSet {
  std::size_t rows = 0;
  std::size_t length = 0;
  std::vector<Tensor> states;  // forward | backward state; zero on padding
  std::vector<Tensor> keys;    // states[t] * attn_key
  Tensor mask;                 // [rows x length]
};

struct DecoderState {
  Tensor hidden;   // [rows x hidden]
  Tensor context;  // [rows x context], last attention read-out
};

struct DecoderStepOutput {
  DecoderState state;
  Tensor log_probs;  // [rows x tgt_vocab]
  Tensor alignment;  // [rows x source length]
};

struct Attention {
  Tensor context;    // [rows x context]
  Tensor alignment;  // [rows x source length]
};

/// One GRU transition. x is [rows x input] (or [input]); h_prev matches the
/// hidden width.
Tensor gru_step(const GRUWeights& w, const Tensor& x, const Tensor& h_prev);

/// Bidirectional encoding of row-major [rows x length] ids and mask.
ContextSet encode(const ModelParams& p, std::span<const int> src_ids,
                  std::span<const double> src_mask, std::size_t rows, std::size_t length);
ContextSet encode(const ModelParams& p, const Batch& batch);

/// Additive attention of the previous decoder state over the context set.
Attention attend(const ModelParams& p, const Tensor& prev_hidden, const ContextSet& ctx);

/// s0 = tanh(mean of unmasked context rows * init_proj); read-out zero.
DecoderState init_decoder(const ModelParams& p, const ContextSet& ctx);

DecoderStepOutput decoder_step(const ModelParams& p, std::span<const int> prev_ids,
                               const DecoderState& state, const ContextSet& ctx);

/// Teacher-forced negative log-likelihood per unmasked target token.
Tensor sequence_nll(const ModelParams& p, const Batch& batch);

/// Repeats row `row` of ctx `copies` times (beam search fan-out).
ContextSet repeat_row(const ContextSet& ctx, std::size_t row, std::size_t copies);

/// Gathers rows of a decoder state (beam search reordering).
DecoderState select_rows(const DecoderState& state, std::span<const std::size_t> rows);

}  // namespace translit
