// SPDX-License-Identifier: Apache-2.0
#include "translit/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "translit/errors.hpp"

namespace translit {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor() : data_(std::make_shared<std::vector<double>>(1, 0.0)) {}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(shape_numel(shape_), fill)) {
  for (auto d : shape_)
    if (d == 0) throw DimensionError("zero-sized dimension in " + shape_string(shape_));
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(std::move(values))) {
  for (auto d : shape_)
    if (d == 0) throw DimensionError("zero-sized dimension in " + shape_string(shape_));
  if (shape_numel(shape_) != data_->size())
    throw DimensionError("shape " + shape_string(shape_) + " does not hold " +
                         std::to_string(data_->size()) + " values");
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

std::size_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  if (shape_.size() == 1) return 1;
  throw DimensionError("rows() on tensor of shape " + shape_string(shape_));
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  throw DimensionError("cols() on tensor of shape " + shape_string(shape_));
}

std::span<double> Tensor::mutable_values() {
  if (data_.use_count() > 1) data_ = std::make_shared<std::vector<double>>(*data_);
  return *data_;
}

double Tensor::item() const {
  if (data_->size() != 1)
    throw ContractError("item() on tensor of shape " + shape_string(shape_));
  return (*data_)[0];
}

Tensor Tensor::detached() const {
  Tensor t = *this;
  t.grad_id_.reset();
  return t;
}

bool Tensor::all_finite() const {
  for (double v : *data_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

}  // namespace translit
