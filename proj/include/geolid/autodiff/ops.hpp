// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "geolid/autodiff/tape.hpp"
#include "geolid/autodiff/tensor.hpp"

// Differentiable tensor ops. Every op records itself on the tape of its
// inputs (if any input is on a tape) together with its backward rule.
// Shape violations throw ShapeError naming the op and the offending shapes.
//
// Instantiated for float and double.
namespace geolid::ad {

// Elementwise, equal shapes.
template <class T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> scale(const Tensor<T>& a, T factor);
template <class T> Tensor<T> add_scalar(const Tensor<T>& a, T offset);

template <class T> Tensor<T> relu(const Tensor<T>& x);
template <class T> Tensor<T> gelu(const Tensor<T>& x);  // exact (erf) form
template <class T> Tensor<T> tanh(const Tensor<T>& x);
template <class T> Tensor<T> sigmoid(const Tensor<T>& x);
template <class T> Tensor<T> log(const Tensor<T>& x);
template <class T> Tensor<T> exp(const Tensor<T>& x);
template <class T> Tensor<T> sqrt(const Tensor<T>& x);

// (m,k)x(k,n); batched (b,m,k)x(b,k,n); or (b,m,k)x(k,n) applying the right
// operand to every batch item.
template <class T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

struct Conv1dAttrs {
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t padding = 0;  // zeros on both ends
};
// x: (batch, time, in_ch) or (time, in_ch); w: (kernel, in_ch, out_ch).
// Output time = floor((time + 2*padding - dilation*(kernel-1) - 1) / stride) + 1.
template <class T> Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& w, Conv1dAttrs attrs);

template <class T> Tensor<T> softmax(const Tensor<T>& x, int axis = -1);

// Reductions remove `axis`.
template <class T> Tensor<T> sum(const Tensor<T>& x, int axis);
template <class T> Tensor<T> mean(const Tensor<T>& x, int axis);
template <class T> Tensor<T> variance(const Tensor<T>& x, int axis);  // biased (1/n)
template <class T> Tensor<T> sum_all(const Tensor<T>& x);
template <class T> Tensor<T> mean_all(const Tensor<T>& x);

template <class T> Tensor<T> concat(std::span<const Tensor<T>> parts, int axis);
template <class T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::size_t begin, std::size_t end);
template <class T> Tensor<T> transpose(const Tensor<T>& x);  // swaps the last two axes
template <class T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Normalizes over the last axis; gamma, beta have the size of the last axis.
template <class T>
Tensor<T> layernorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    T eps = T(1e-5));

// Running statistics owned by the caller. Updated in training mode only.
template <class T>
struct BatchNormStats {
  std::span<T> mean;
  std::span<T> var;
};
struct BatchNormAttrs {
  bool training = true;
  double momentum = 0.1;
  double eps = 1e-5;
};
// Per-feature normalization over every axis except the last. Training mode
// uses batch statistics (biased variance) and updates `stats` with the
// unbiased variance; inference mode normalizes with `stats`.
template <class T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    BatchNormStats<T> stats, BatchNormAttrs attrs);

// Broadcast over the time axis (second to last). `v` is either a vector the
// size of the last axis, or has x's shape with the time axis removed.
template <class T> Tensor<T> broadcast_add(const Tensor<T>& x, const Tensor<T>& v);
template <class T> Tensor<T> broadcast_mul(const Tensor<T>& x, const Tensor<T>& v);

// sum_i weights[i] * parts[i]; weights is a vector with one entry per part.
template <class T>
Tensor<T> weighted_sum(const Tensor<T>& weights, std::span<const Tensor<T>> parts);

// Last axis of size groups*group_size -> groups, taking the max in each group.
template <class T> Tensor<T> group_max(const Tensor<T>& x, std::size_t group_size);

// x / max(||x||, eps) along the last axis.
template <class T> Tensor<T> l2_normalize(const Tensor<T>& x, T eps = T(1e-12));

// cosines (batch, classes): the entry of the labelled class becomes
// cos(min(acos(c) + margin, pi)); other entries pass through.
template <class T>
Tensor<T> angular_margin(const Tensor<T>& cosines, std::span<const int> labels, T margin);

// Mean over the batch of -log softmax(logits)[label].
template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

// Mean squared error over all elements.
template <class T> Tensor<T> mse(const Tensor<T>& prediction, const Tensor<T>& target);

// Forward identity; gradients do not flow back through the result.
template <class T> Tensor<T> detach(const Tensor<T>& x);

// Generic entry point over the op set, used by tooling that enumerates ops
// (gradient checks, benchmarks).
enum class OpKind {
  add, sub, mul, scale, matmul, conv1d, relu, gelu, tanh, sigmoid, softmax, log, exp, sqrt,
  mean, variance, sum, concat, slice, transpose, layernorm, batchnorm, broadcast_add,
  broadcast_mul, weighted_sum, group_max, l2_normalize, cross_entropy, mse, angular_margin,
  detach,
};

struct OpAttrs {
  double scalar = 1.0;  // scale factor, margin
  int axis = -1;
  std::size_t begin = 0, end = 0;  // slice bounds
  std::size_t group = 1;           // group_max
  Conv1dAttrs conv{};
  BatchNormAttrs bn{};
  std::vector<int> labels;  // cross_entropy / angular_margin
};

std::string_view op_name(OpKind kind);
std::vector<OpKind> all_op_kinds();

// batchnorm through this entry point uses scratch running statistics.
template <class T>
Tensor<T> tensor_op(OpKind kind, std::span<const Tensor<T>> inputs, const OpAttrs& attrs = {});

}  // namespace geolid::ad
