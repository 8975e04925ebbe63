// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "translit/tensor.hpp"

// Differentiable tensor operations. Every op records a node on the active
// tape when at least one input is tracked by it; otherwise it is a plain
// forward computation. Rank-1 tensors behave as a single row.

namespace translit {

enum class Activation { sigmoid, tanh };

/// [m x k] * [k x n]. A rank-1 left operand yields a rank-1 result.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Element-wise product.
Tensor mul(const Tensor& a, const Tensor& b);
/// a + bias broadcast over rows; bias is rank-1 of length cols(a).
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor scale(const Tensor& a, double factor);
/// 1 - a, element-wise.
Tensor one_minus(const Tensor& a);

Tensor activation(const Tensor& x, Activation kind);
inline Tensor sigmoid(const Tensor& x) { return activation(x, Activation::sigmoid); }
inline Tensor tanh(const Tensor& x) { return activation(x, Activation::tanh); }

/// Horizontal concatenation; all parts share rank and row count.
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);

/// Rows of `table` selected by ids: [ids.size() x cols(table)].
Tensor gather_rows(const Tensor& table, std::span<const int> ids);

/// Scales row i of a by c[i]; c holds rows(a) values (shape [m] or [m x 1]).
Tensor mul_col(const Tensor& a, const Tensor& c);

/// Row-wise softmax restricted to positions where mask == 1. Masked
/// positions come out exactly 0. The mask is never differentiated.
Tensor masked_softmax(const Tensor& scores, const Tensor& mask);

/// Row-wise log-softmax.
Tensor log_softmax(const Tensor& x);

/// sum_i weights[i] * logp[i, ids[i]] as a scalar.
Tensor pick_sum(const Tensor& logp, std::span<const int> ids, std::span<const double> weights);

Tensor sum(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

}  // namespace translit
