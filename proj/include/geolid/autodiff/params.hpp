// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "geolid/autodiff/tape.hpp"
#include "geolid/autodiff/tensor.hpp"

namespace geolid::ad {

enum class ParamKind {
  weight,  // differentiable; updated by the optimizer when trainable
  buffer,  // running statistics and similar state; never differentiated
};

template <class T>
struct Param {
  Tensor<T> value;
  bool trainable = true;
  ParamKind kind = ParamKind::weight;
};

// Named parameters in insertion order.
template <class T>
class ParameterSet {
 public:
  void add(const std::string& name, Tensor<T> value, bool trainable = true,
           ParamKind kind = ParamKind::weight) {
    if (index_.count(name)) throw DuplicateKeyError("parameter '" + name + "' already exists");
    index_.emplace(name, entries_.size());
    entries_.push_back({name, Param<T>{value.detach(), trainable, kind}});
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const Param<T>& at(const std::string& name) const { return entries_[lookup(name)].second; }
  Param<T>& at(const std::string& name) { return entries_[lookup(name)].second; }

  const Tensor<T>& value(const std::string& name) const { return at(name).value; }

  void set_value(const std::string& name, Tensor<T> value) {
    auto& p = at(name);
    if (p.value.shape() != value.shape()) {
      throw ShapeError("set_value '" + name + "': " + shape_str(p.value.shape()) + " vs " +
                       shape_str(value.shape()));
    }
    p.value = value.detach();
  }

  void set_trainable(const std::string& name, bool trainable) { at(name).trainable = trainable; }

  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, p] : entries_) n += p.value.size();
    return n;
  }

  // Converts element type, e.g. float training weights into a double copy
  // for gradient checking.
  template <class U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& [name, p] : entries_) {
      std::vector<U> v(p.value.data().begin(), p.value.data().end());
      out.add(name, Tensor<U>(p.value.shape(), std::move(v)), p.trainable, p.kind);
    }
    return out;
  }

 private:
  std::size_t lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw NotFoundError("no parameter named '" + name + "'");
    return it->second;
  }

  std::vector<std::pair<std::string, Param<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Gradient of a scalar loss with respect to every weight in `params`.
// Weights never touched by the forward pass map to zeros.
template <class T>
Gradients<T> backward(const Tensor<T>& loss, const ParameterSet<T>& params) {
  Gradients<T> tape_grads;
  if (loss.tape() != nullptr) {
    tape_grads = loss.tape()->backward(loss);
  } else if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(loss.shape()));
  }
  Gradients<T> out;
  for (const auto& [name, p] : params) {
    if (p.kind != ParamKind::weight) continue;
    auto it = tape_grads.find(name);
    if (it != tape_grads.end()) {
      out.emplace(name, it->second);
    } else {
      out.emplace(name, Tensor<T>(p.value.shape()));
    }
  }
  return out;
}

}  // namespace geolid::ad
