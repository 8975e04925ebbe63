// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "translit/tensor.hpp"

namespace translit {

class Gradients;

/// Define-by-run record of differentiable operations.
///
/// Nodes are appended in execution order, which is a topological order of
/// the computation graph; backward() walks them in reverse. A tape is
/// confined to the thread that activated it.
class Tape {
 public:
  /// Receives the gradient flowing into a node and pushes it to the inputs.
  using BackwardFn = std::function<void(std::span<const double> grad_out, Gradients& grads)>;

  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::uint64_t serial() const { return serial_; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Registers t as a leaf; returns a copy linked to this tape.
  Tensor watch(const Tensor& t);

  /// Appends an op node whose output is `out`; links `out` to it.
  void record(Tensor& out, BackwardFn backward);

  /// Node index of t on this tape, or nullopt when t is untracked here.
  std::optional<std::size_t> node_of(const Tensor& t) const;

  const Shape& node_shape(std::size_t node) const { return nodes_[node].shape; }

 private:
  friend Gradients backward(const Tape& tape, const Tensor& loss);

  struct Node {
    Shape shape;
    BackwardFn backward;  // empty for leaves
  };

  std::uint64_t serial_;
  std::vector<Node> nodes_;
};

/// Tape that ops record onto in the current thread, or nullptr.
Tape* active_tape();

/// Activates a tape for the lifetime of the scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// Gradient buffers keyed by tape node, allocated on first touch.
class Gradients {
 public:
  explicit Gradients(const Tape& tape);

  /// Mutable gradient buffer for the node, zero-initialized on first use.
  std::span<double> slot(std::size_t node);
  bool touched(std::size_t node) const { return !buffers_[node].empty(); }

  /// Gradient of the loss w.r.t. a watched tensor; zeros if the tensor did
  /// not influence the loss.
  Tensor of(const Tensor& watched) const;

 private:
  const Tape* tape_;
  std::vector<std::vector<double>> buffers_;
};

/// Reverse-mode sweep from a scalar loss recorded on `tape`.
Gradients backward(const Tape& tape, const Tensor& loss);

}  // namespace translit
