// SPDX-License-Identifier: Apache-2.0
#include "translit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <optional>

#include "translit/errors.hpp"
#include "translit/tape.hpp"

namespace translit {

namespace {

using Slot = std::optional<std::size_t>;

// Tape to record on, when any input is tracked by the active one.
Tape* recording_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = active_tape();
  if (!tape) return nullptr;
  for (const Tensor* t : inputs)
    if (tape->node_of(*t)) return tape;
  return nullptr;
}

Slot slot_of(const Tape* tape, const Tensor& t) { return tape ? tape->node_of(t) : std::nullopt; }

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!same_shape(a, b))
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
}

void require_matrix_like(const Tensor& a, const char* op) {
  if (a.rank() != 1 && a.rank() != 2)
    throw DimensionError(std::string(op) + ": expected rank 1 or 2, got " +
                         shape_string(a.shape()));
}

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::span<const double> A, std::span<const double> B, std::span<double> C,
             std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* c = C.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A[i * k + p];
      const double* b = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += a * b[j];
    }
  }
}

// dA[m x k] += G[m x n] * B[k x n]^T
void gemm_nt(std::span<const double> G, std::span<const double> B, std::span<double> dA,
             std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* g = G.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* b = B.data() + p * n;
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += g[j] * b[j];
      dA[i * k + p] += s;
    }
  }
}

// dB[k x n] += A[m x k]^T * G[m x n]
void gemm_tn(std::span<const double> A, std::span<const double> G, std::span<double> dB,
             std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* g = G.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A[i * k + p];
      double* d = dB.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) d[j] += a * g[j];
    }
  }
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix_like(a, "matmul");
  if (b.rank() != 2)
    throw DimensionError("matmul: right operand must be rank 2, got " + shape_string(b.shape()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw DimensionError("matmul: inner dimensions disagree, " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  Tensor out(a.rank() == 1 ? Shape{n} : Shape{m, n});
  gemm_nn(a.values(), b.values(), out.mutable_values(), m, k, n);

  if (Tape* tape = recording_tape({&a, &b})) {
    Slot sa = slot_of(tape, a), sb = slot_of(tape, b);
    tape->record(out, [a, b, sa, sb, m, k, n](std::span<const double> g, Gradients& grads) {
      if (sa) gemm_nt(g, b.values(), grads.slot(*sa), m, k, n);
      if (sb) gemm_tn(a.values(), g, grads.slot(*sb), m, k, n);
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  Tensor out = a.detached();
  auto o = out.mutable_values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];

  if (Tape* tape = recording_tape({&a, &b})) {
    Slot sa = slot_of(tape, a), sb = slot_of(tape, b);
    tape->record(out, [sa, sb](std::span<const double> g, Gradients& grads) {
      for (Slot s : {sa, sb}) {
        if (!s) continue;
        auto d = grads.slot(*s);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  Tensor out = a.detached();
  auto o = out.mutable_values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];

  if (Tape* tape = recording_tape({&a, &b})) {
    Slot sa = slot_of(tape, a), sb = slot_of(tape, b);
    tape->record(out, [sa, sb](std::span<const double> g, Gradients& grads) {
      if (sa) {
        auto d = grads.slot(*sa);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
      }
      if (sb) {
        auto d = grads.slot(*sb);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  Tensor out = a.detached();
  auto o = out.mutable_values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];

  if (Tape* tape = recording_tape({&a, &b})) {
    Slot sa = slot_of(tape, a), sb = slot_of(tape, b);
    tape->record(out, [a, b, sa, sb](std::span<const double> g, Gradients& grads) {
      if (sa) {
        auto d = grads.slot(*sa);
        auto bv = b.values();
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bv[i];
      }
      if (sb) {
        auto d = grads.slot(*sb);
        auto av = a.values();
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_matrix_like(a, "add_bias");
  const std::size_t m = a.rows(), n = a.cols();
  if (bias.rank() != 1 || bias.size() != n)
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) + " does not fit " +
                         shape_string(a.shape()));
  Tensor out = a.detached();
  auto o = out.mutable_values();
  auto bv = bias.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) o[i * n + j] += bv[j];

  if (Tape* tape = recording_tape({&a, &bias})) {
    Slot sa = slot_of(tape, a), sb = slot_of(tape, bias);
    tape->record(out, [sa, sb, m, n](std::span<const double> g, Gradients& grads) {
      if (sa) {
        auto d = grads.slot(*sa);
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
      }
      if (sb) {
        auto d = grads.slot(*sb);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) d[j] += g[i * n + j];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = a.detached();
  for (double& v : out.mutable_values()) v *= factor;

  if (Tape* tape = recording_tape({&a})) {
    Slot sa = slot_of(tape, a);
    tape->record(out, [sa, factor](std::span<const double> g, Gradients& grads) {
      auto d = grads.slot(*sa);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += factor * g[i];
    });
  }
  return out;
}

Tensor one_minus(const Tensor& a) {
  Tensor out = a.detached();
  for (double& v : out.mutable_values()) v = 1.0 - v;

  if (Tape* tape = recording_tape({&a})) {
    Slot sa = slot_of(tape, a);
    tape->record(out, [sa](std::span<const double> g, Gradients& grads) {
      auto d = grads.slot(*sa);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
    });
  }
  return out;
}

Tensor activation(const Tensor& x, Activation kind) {
  Tensor out = x.detached();
  auto o = out.mutable_values();
  if (kind == Activation::sigmoid)
    for (double& v : o) v = stable_sigmoid(v);
  else
    for (double& v : o) v = std::tanh(v);

  if (Tape* tape = recording_tape({&x})) {
    Slot sx = slot_of(tape, x);
    tape->record(out, [y = out.detached(), sx, kind](std::span<const double> g, Gradients& grads) {
      auto d = grads.slot(*sx);
      auto yv = y.values();
      if (kind == Activation::sigmoid)
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * yv[i] * (1.0 - yv[i]);
      else
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * (1.0 - yv[i] * yv[i]);
    });
  }
  return out;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t rank = parts.front().rank();
  require_matrix_like(parts.front(), "concat_cols");
  const std::size_t m = parts.front().rows();
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.rank() != rank || p.rows() != m)
      throw DimensionError("concat_cols: incompatible part " + shape_string(p.shape()) +
                           " with " + shape_string(parts.front().shape()));
    n += p.cols();
  }
  Tensor out(rank == 1 ? Shape{n} : Shape{m, n});
  auto o = out.mutable_values();
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.cols();
    auto pv = p.values();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(pv.begin() + i * w, w, o.begin() + i * n + off);
    offsets.push_back(off);
    off += w;
  }

  Tape* tape = active_tape();
  std::vector<std::pair<Slot, std::size_t>> slots;  // (node, width)
  bool any = false;
  for (const auto& p : parts) {
    Slot s = slot_of(tape, p);
    any = any || s.has_value();
    slots.emplace_back(s, p.cols());
  }
  if (any) {
    tape->record(out, [slots, offsets, m, n](std::span<const double> g, Gradients& grads) {
      for (std::size_t k = 0; k < slots.size(); ++k) {
        const auto& [s, w] = slots[k];
        if (!s) continue;
        auto d = grads.slot(*s);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j) d[i * w + j] += g[i * n + offsets[k] + j];
      }
    });
  }
  return out;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_matrix_like(a, "slice_cols");
  const std::size_t m = a.rows(), n = a.cols();
  if (count == 0 || begin + count > n)
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", +" +
                         std::to_string(count) + ") outside " + shape_string(a.shape()));
  Tensor out(a.rank() == 1 ? Shape{count} : Shape{m, count});
  auto o = out.mutable_values();
  auto av = a.values();
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(av.begin() + i * n + begin, count, o.begin() + i * count);

  if (Tape* tape = recording_tape({&a})) {
    Slot sa = slot_of(tape, a);
    tape->record(out, [sa, m, n, begin, count](std::span<const double> g, Gradients& grads) {
      auto d = grads.slot(*sa);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < count; ++j) d[i * n + begin + j] += g[i * count + j];
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  if (table.rank() != 2) throw DimensionError("gather_rows: table must be rank 2");
  if (ids.empty()) throw DimensionError("gather_rows: no ids");
  const std::size_t v = table.rows(), e = table.cols();
  Tensor out(Shape{ids.size(), e});
  auto o = out.mutable_values();
  auto tv = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= v)
      throw RangeError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(v) + " rows");
    std::copy_n(tv.begin() + static_cast<std::size_t>(ids[i]) * e, e, o.begin() + i * e);
  }

  if (Tape* tape = recording_tape({&table})) {
    Slot st = slot_of(tape, table);
    std::vector<int> idv(ids.begin(), ids.end());
    tape->record(out, [st, idv = std::move(idv), e](std::span<const double> g, Gradients& grads) {
      auto d = grads.slot(*st);
      for (std::size_t i = 0; i < idv.size(); ++i)
        for (std::size_t j = 0; j < e; ++j)
          d[static_cast<std::size_t>(idv[i]) * e + j] += g[i * e + j];
    });
  }
  return out;
}

Tensor mul_col(const Tensor& a, const Tensor& c) {
  require_matrix_like(a, "mul_col");
  const std::size_t m = a.rows(), n = a.cols();
  if (c.size() != m)
    throw DimensionError("mul_col: column " + shape_string(c.shape()) + " does not fit " +
                         shape_string(a.shape()));
  Tensor out = a.detached();
  auto o = out.mutable_values();
  auto cv = c.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) o[i * n + j] *= cv[i];

  if (Tape* tape = recording_tape({&a, &c})) {
    Slot sa = slot_of(tape, a), sc = slot_of(tape, c);
    tape->record(out, [a, c, sa, sc, m, n](std::span<const double> g, Gradients& grads) {
      if (sa) {
        auto d = grads.slot(*sa);
        auto cv = c.values();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) d[i * n + j] += g[i * n + j] * cv[i];
      }
      if (sc) {
        auto d = grads.slot(*sc);
        auto av = a.values();
        for (std::size_t i = 0; i < m; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * av[i * n + j];
          d[i] += s;
        }
      }
    });
  }
  return out;
}

Tensor masked_softmax(const Tensor& scores, const Tensor& mask) {
  require_matrix_like(scores, "masked_softmax");
  require_same(scores, mask, "masked_softmax");
  const std::size_t m = scores.rows(), n = scores.cols();
  Tensor out(scores.shape(), 0.0);
  auto o = out.mutable_values();
  auto sv = scores.values();
  auto mv = mask.values();
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n; ++j)
      if (mv[i * n + j] != 0.0) {
        mx = std::max(mx, sv[i * n + j]);
        any = true;
      }
    if (!any) throw InvalidMaskError("masked_softmax: row " + std::to_string(i) + " is fully masked");
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (mv[i * n + j] != 0.0) {
        o[i * n + j] = std::exp(sv[i * n + j] - mx);
        z += o[i * n + j];
      }
    for (std::size_t j = 0; j < n; ++j) o[i * n + j] /= z;
  }

  if (Tape* tape = recording_tape({&scores})) {
    Slot ss = slot_of(tape, scores);
    tape->record(out, [y = out.detached(), ss, m, n](std::span<const double> g, Gradients& grads) {
      auto d = grads.slot(*ss);
      auto yv = y.values();
      for (std::size_t i = 0; i < m; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += yv[i * n + j] * g[i * n + j];
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] += yv[i * n + j] * (g[i * n + j] - dot);
      }
    });
  }
  return out;
}

Tensor log_softmax(const Tensor& x) {
  require_matrix_like(x, "log_softmax");
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = x.detached();
  auto o = out.mutable_values();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = o.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < n; ++j) row[j] -= lse;
  }

  if (Tape* tape = recording_tape({&x})) {
    Slot sx = slot_of(tape, x);
    tape->record(out, [y = out.detached(), sx, m, n](std::span<const double> g, Gradients& grads) {
      auto d = grads.slot(*sx);
      auto yv = y.values();
      for (std::size_t i = 0; i < m; ++i) {
        double gs = 0.0;
        for (std::size_t j = 0; j < n; ++j) gs += g[i * n + j];
        for (std::size_t j = 0; j < n; ++j)
          d[i * n + j] += g[i * n + j] - std::exp(yv[i * n + j]) * gs;
      }
    });
  }
  return out;
}

Tensor pick_sum(const Tensor& logp, std::span<const int> ids, std::span<const double> weights) {
  require_matrix_like(logp, "pick_sum");
  const std::size_t m = logp.rows(), n = logp.cols();
  if (ids.size() != m || weights.size() != m)
    throw DimensionError("pick_sum: " + std::to_string(ids.size()) + " ids / " +
                         std::to_string(weights.size()) + " weights for " +
                         shape_string(logp.shape()));
  double total = 0.0;
  auto lv = logp.values();
  for (std::size_t i = 0; i < m; ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= n)
      throw RangeError("pick_sum: id " + std::to_string(ids[i]) + " outside " +
                       std::to_string(n) + " columns");
    if (weights[i] != 0.0) total += weights[i] * lv[i * n + static_cast<std::size_t>(ids[i])];
  }
  Tensor out = Tensor::scalar(total);

  if (Tape* tape = recording_tape({&logp})) {
    Slot sl = slot_of(tape, logp);
    std::vector<int> idv(ids.begin(), ids.end());
    std::vector<double> wv(weights.begin(), weights.end());
    tape->record(out, [sl, idv = std::move(idv), wv = std::move(wv), n](std::span<const double> g,
                                                                        Gradients& grads) {
      auto d = grads.slot(*sl);
      for (std::size_t i = 0; i < idv.size(); ++i)
        d[i * n + static_cast<std::size_t>(idv[i])] += g[0] * wv[i];
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  Tensor out = Tensor::scalar(total);

  if (Tape* tape = recording_tape({&a})) {
    Slot sa = slot_of(tape, a);
    tape->record(out, [sa](std::span<const double> g, Gradients& grads) {
      for (double& d : grads.slot(*sa)) d += g[0];
    });
  }
  return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.size())
    throw DimensionError("reshape: " + shape_string(a.shape()) + " to " + shape_string(shape));
  Tensor out(std::move(shape), std::vector<double>(a.values().begin(), a.values().end()));

  if (Tape* tape = recording_tape({&a})) {
    Slot sa = slot_of(tape, a);
    tape->record(out, [sa](std::span<const double> g, Gradients& grads) {
      auto d = grads.slot(*sa);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    });
  }
  return out;
}

}  // namespace translit
