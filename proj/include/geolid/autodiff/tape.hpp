// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "geolid/autodiff/tensor.hpp"

namespace geolid::ad {

template <class T>
using Gradients = std::map<std::string, Tensor<T>>;

// Hands a backward rule writable gradient buffers for the inputs of the node
// being processed. Buffers are allocated (zeroed) on first request; an input
// that is not on the tape yields an empty span and should be skipped.
template <class T>
class GradSink {
 public:
  GradSink(std::vector<std::vector<T>>& grads, const std::vector<int>& inputs,
           const std::vector<std::size_t>& sizes)
      : grads_(grads), inputs_(inputs), sizes_(sizes) {}

  bool wants(std::size_t slot) const { return inputs_[slot] >= 0; }

  std::span<T> operator[](std::size_t slot) {
    const int id = inputs_[slot];
    if (id < 0) return {};
    auto& g = grads_[static_cast<std::size_t>(id)];
    if (g.empty()) g.assign(sizes_[static_cast<std::size_t>(id)], T(0));
    return {g.data(), g.size()};
  }

 private:
  std::vector<std::vector<T>>& grads_;
  const std::vector<int>& inputs_;
  const std::vector<std::size_t>& sizes_;
};

// Linear record of operations for reverse-mode differentiation. Nodes are
// appended in evaluation order, so the record is topologically sorted and the
// backward sweep is a single reverse pass. Confined to one thread.
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void(std::span<const T> grad_out, GradSink<T>& sink)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a named differentiable input. Re-registering a name returns the
  // existing leaf.
  Tensor<T> leaf(const Tensor<T>& value, const std::string& name) {
    if (auto it = leaf_ids_.find(name); it != leaf_ids_.end()) {
      return leaf_values_[it->second].attached(this, it->second);
    }
    const int id = push(value.size(), {}, nullptr);
    leaf_ids_.emplace(name, id);
    leaf_names_.emplace(id, name);
    leaf_values_.emplace(id, value.detach());
    return value.detach().attached(this, id);
  }

  // Records an op output. Inputs not on this tape are treated as constants.
  // When no input is on the tape the output is returned as a constant and
  // nothing is recorded.
  Tensor<T> record(const Tensor<T>& value, const std::vector<const Tensor<T>*>& inputs,
                   BackwardFn backward) {
    std::vector<int> ids;
    ids.reserve(inputs.size());
    bool any = false;
    for (const Tensor<T>* in : inputs) {
      if (in->tape() == this && in->node() >= 0) {
        ids.push_back(in->node());
        any = true;
      } else {
        ids.push_back(-1);
      }
    }
    if (!any) return value.detach();
    const int id = push(value.size(), std::move(ids), std::move(backward));
    return value.attached(this, id);
  }

  // Reverse sweep from a scalar loss. Returns a gradient for every leaf on the
  // tape; leaves the loss does not reach get zeros.
  Gradients<T> backward(const Tensor<T>& loss) const {
    if (loss.size() != 1) {
      throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                  shape_str(loss.shape()));
    }
    std::vector<std::vector<T>> grads(nodes_.size());
    if (loss.tape() == this && loss.node() >= 0) {
      grads[static_cast<std::size_t>(loss.node())].assign(1, T(1));
      for (int i = loss.node(); i >= 0; --i) {
        const auto& node = nodes_[static_cast<std::size_t>(i)];
        auto& g = grads[static_cast<std::size_t>(i)];
        if (g.empty() || !node.backward) continue;
        GradSink<T> sink(grads, node.inputs, sizes_);
        node.backward(std::span<const T>(g.data(), g.size()), sink);
        if (leaf_names_.find(i) == leaf_names_.end()) {
          std::vector<T>().swap(g);
        }
      }
    }
    Gradients<T> out;
    for (const auto& [id, name] : leaf_names_) {
      const auto& value = leaf_values_.at(id);
      auto& g = grads[static_cast<std::size_t>(id)];
      if (g.empty()) {
        out.emplace(name, Tensor<T>(value.shape()));
      } else {
        out.emplace(name, Tensor<T>(value.shape(), std::move(g)));
      }
    }
    return out;
  }

  void clear() {
    nodes_.clear();
    sizes_.clear();
    leaf_ids_.clear();
    leaf_names_.clear();
    leaf_values_.clear();
  }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    std::vector<int> inputs;
    BackwardFn backward;
  };

  int push(std::size_t numel, std::vector<int> inputs, BackwardFn backward) {
    nodes_.push_back(Node{std::move(inputs), std::move(backward)});
    sizes_.push_back(numel);
    return static_cast<int>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::vector<std::size_t> sizes_;
  std::unordered_map<std::string, int> leaf_ids_;
  std::map<int, std::string> leaf_names_;
  std::map<int, Tensor<T>> leaf_values_;
};

}  // namespace geolid::ad
