// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace translit {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Handle of a tensor inside one particular gradient tape.
struct GradId {
  std::uint64_t tape = 0;
  std::size_t node = 0;
};

/// Dense row-major array of doubles.
///
/// Storage is shared between copies and detached on the first mutable
/// access, so passing tensors by value is cheap and still behaves like a
/// value. A tensor produced while a tape is active carries a GradId that
/// ties it to the recorded node.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_->size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  /// Rows/cols of a rank-2 tensor; a rank-1 tensor is a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return *data_; }
  std::span<double> mutable_values();

  double operator[](std::size_t i) const { return (*data_)[i]; }
  double at(std::size_t r, std::size_t c) const { return (*data_)[r * cols() + c]; }
  double item() const;

  const std::optional<GradId>& grad_id() const { return grad_id_; }
  void set_grad_id(std::optional<GradId> id) { grad_id_ = id; }
  /// Copy with no tape linkage.
  Tensor detached() const;

  bool all_finite() const;

 private:
  Shape shape_;
  std::shared_ptr<std::vector<double>> data_;
  std::optional<GradId> grad_id_;
};

bool same_shape(const Tensor& a, const Tensor& b);

}  // namespace translit
