// SPDX-License-Identifier: Apache-2.0
#include "translit/tape.hpp"

#include <atomic>

#include "translit/errors.hpp"

namespace translit {

namespace {

std::atomic<std::uint64_t> next_serial{1};
thread_local Tape* current_tape = nullptr;

}  // namespace

Tape::Tape() : serial_(next_serial.fetch_add(1)) {}

Tensor Tape::watch(const Tensor& t) {
  Tensor out = t.detached();
  nodes_.push_back(Node{out.shape(), {}});
  out.set_grad_id(GradId{serial_, nodes_.size() - 1});
  return out;
}

void Tape::record(Tensor& out, BackwardFn backward) {
  nodes_.push_back(Node{out.shape(), std::move(backward)});
  out.set_grad_id(GradId{serial_, nodes_.size() - 1});
}

std::optional<std::size_t> Tape::node_of(const Tensor& t) const {
  const auto& id = t.grad_id();
  if (!id || id->tape != serial_) return std::nullopt;
  return id->node;
}

Tape* active_tape() { return current_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(current_tape) { current_tape = &tape; }

TapeScope::~TapeScope() { current_tape = previous_; }

Gradients::Gradients(const Tape& tape) : tape_(&tape), buffers_(tape.node_count()) {}

std::span<double> Gradients::slot(std::size_t node) {
  auto& buf = buffers_.at(node);
  if (buf.empty()) buf.assign(shape_numel(tape_->node_shape(node)), 0.0);
  return buf;
}

Tensor Gradients::of(const Tensor& watched) const {
  auto node = tape_->node_of(watched);
  if (!node) throw ContractError("tensor is not tracked by this tape");
  const auto& buf = buffers_.at(*node);
  if (buf.empty()) return Tensor(watched.shape(), 0.0);
  return Tensor(watched.shape(), buf);
}

Gradients backward(const Tape& tape, const Tensor& loss) {
  if (loss.size() != 1)
    throw ContractError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  auto root = tape.node_of(loss);
  if (!root) throw ContractError("loss was not recorded on this tape");

  Gradients grads(tape);
  grads.slot(*root)[0] = 1.0;
  for (std::size_t i = *root + 1; i-- > 0;) {
    const auto& node = tape.nodes_[i];
    if (!node.backward || !grads.touched(i)) continue;
    node.backward(grads.slot(i), grads);
  }
  return grads;
}

}  // namespace translit
