// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geolid/errors.hpp"

namespace geolid::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <class T>
class Tape;

// Dense row-major array. Storage is shared and immutable once a tensor is
// handed to an op, so copies are cheap; mutable_data() unshares first.
//
// A tensor produced by an op on a tape carries (tape, node) so later ops can
// record their backward rule against it. The tape must outlive the tensor's
// use in further ops.
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() : Tensor(Shape{}) {}

  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(shape_numel(shape_), fill)) {
    check_dims();
  }

  Tensor(Shape shape, std::vector<T> values)
      : shape_(std::move(shape)), data_(std::make_shared<std::vector<T>>(std::move(values))) {
    check_dims();
    if (data_->size() != shape_numel(shape_)) {
      throw ShapeError("tensor: " + std::to_string(data_->size()) +
                       " values do not fill shape " + shape_str(shape_));
    }
  }

  static Tensor scalar(T v) { return Tensor(Shape{}, std::vector<T>{v}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_->size(); }

  // Negative axes count from the back.
  std::size_t dim(int axis) const {
    const int r = static_cast<int>(shape_.size());
    const int a = axis < 0 ? axis + r : axis;
    if (a < 0 || a >= r) {
      throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                       shape_str(shape_));
    }
    return shape_[static_cast<std::size_t>(a)];
  }

  std::span<const T> data() const noexcept { return {data_->data(), data_->size()}; }

  // Writable view. Unshares the storage and drops any tape node: a tensor that
  // was written in place no longer represents the recorded value.
  std::span<T> mutable_data() {
    if (data_.use_count() > 1) data_ = std::make_shared<std::vector<T>>(*data_);
    tape_ = nullptr;
    node_ = -1;
    return {data_->data(), data_->size()};
  }

  T operator[](std::size_t i) const { return (*data_)[i]; }

  T item() const {
    if (data_->size() != 1) throw ShapeError("item: tensor of shape " + shape_str(shape_));
    return (*data_)[0];
  }

  std::vector<T> to_vector() const { return *data_; }

  Tape<T>* tape() const noexcept { return tape_; }
  int node() const noexcept { return node_; }
  bool on_tape() const noexcept { return tape_ != nullptr && node_ >= 0; }

  // Same values, no tape node: nothing recorded downstream flows back here.
  Tensor detach() const {
    Tensor out = *this;
    out.tape_ = nullptr;
    out.node_ = -1;
    return out;
  }

  Tensor reshaped(Shape shape) const {
    if (shape_numel(shape) != size()) {
      throw ShapeError("reshape: " + shape_str(shape_) + " -> " + shape_str(shape));
    }
    Tensor out = detach();
    out.shape_ = std::move(shape);
    return out;
  }

  // Used by Tape when recording.
  Tensor attached(Tape<T>* tape, int node) const {
    Tensor out = *this;
    out.tape_ = tape;
    out.node_ = node;
    return out;
  }

 private:
  void check_dims() const {
    for (auto d : shape_) {
      if (d == 0) throw ShapeError("tensor: zero-sized dimension in " + shape_str(shape_));
    }
  }

  Shape shape_;
  std::shared_ptr<std::vector<T>> data_;
  Tape<T>* tape_ = nullptr;
  int node_ = -1;
};

}  // namespace geolid::ad
