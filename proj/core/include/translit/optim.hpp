// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "translit/tensor.hpp"

namespace translit {

/// sqrt of the sum of squared entries over every tensor.
double global_norm(std::span<const Tensor> grads);

/// Rescales the whole set by threshold / norm when its global norm exceeds
/// threshold; returns it untouched otherwise.
std::vector<Tensor> clip_global_norm(std::vector<Tensor> grads, double threshold);

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moments are allocated on the first update and mirror the parameter shapes.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One bias-corrected Adam step, in place.
void adam_update(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads);

}  // namespace translit
