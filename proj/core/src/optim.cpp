// SPDX-License-Identifier: Apache-2.0
#include "translit/optim.hpp"

#include <cmath>

#include "translit/errors.hpp"

namespace translit {

double global_norm(std::span<const Tensor> grads) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double x : g.values()) sq += x * x;
  return std::sqrt(sq);
}

std::vector<Tensor> clip_global_norm(std::vector<Tensor> grads, double threshold) {
  if (!(threshold > 0.0)) throw ContractError("clip threshold must be positive");
  const double norm = global_norm(grads);
  if (norm <= threshold) return grads;
  const double factor = threshold / norm;
  for (auto& g : grads)
    for (double& x : g.mutable_values()) x *= factor;
  return grads;
}

void adam_update(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size())
    throw DimensionError("adam_update: " + std::to_string(params.size()) + " params but " +
                         std::to_string(grads.size()) + " gradients");
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->shape(), 0.0);
      state.v.emplace_back(p->shape(), 0.0);
    }
  }
  if (state.m.size() != params.size())
    throw DimensionError("adam_update: state holds " + std::to_string(state.m.size()) +
                         " moments for " + std::to_string(params.size()) + " params");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i].shape() || params[i]->shape() != state.m[i].shape())
      throw DimensionError("adam_update: param " + shape_string(params[i]->shape()) +
                           ", grad " + shape_string(grads[i].shape()) + ", moment " +
                           shape_string(state.m[i].shape()));
  }

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->mutable_values();
    auto g = grads[i].values();
    auto m = state.m[i].mutable_values();
    auto v = state.v[i].mutable_values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= c.alpha * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace translit
