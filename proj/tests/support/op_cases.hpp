// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Random small inputs for every op kind plus a gradient-check driver. Shared by
// the unit tests and the acceptance binary.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "geolid/autodiff/gradcheck.hpp"
#include "geolid/autodiff/ops.hpp"

namespace geolid::testing {

using ad::OpAttrs;
using ad::OpKind;
using ad::Shape;
using ad::Tensor;

struct OpCase {
  OpKind kind;
  std::vector<Tensor<double>> inputs;
  std::vector<bool> differentiable;
  OpAttrs attrs;
};

inline Tensor<double> random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0,
                                    double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.mutable_data()) v = u(rng);
  return t;
}

// Values bounded away from zero, for kinked ops.
inline Tensor<double> away_from_zero(std::mt19937_64& rng, Shape shape) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.mutable_data()) v = sign(rng) ? u(rng) : -u(rng);
  return t;
}

inline std::vector<OpCase> make_op_cases(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto R = [&](Shape s) { return random_tensor(rng, std::move(s)); };
  std::vector<OpCase> cases;
  for (OpKind kind : ad::all_op_kinds()) {
    OpCase c{kind, {}, {}, {}};
    switch (kind) {
      case OpKind::add:
      case OpKind::sub:
      case OpKind::mul:
      case OpKind::mse:
        c.inputs = {R({3, 4}), R({3, 4})};
        break;
      case OpKind::scale:
        c.inputs = {R({2, 5})};
        c.attrs.scalar = -1.7;
        break;
      case OpKind::matmul:
        c.inputs = {R({2, 3, 4}), R({2, 4, 5})};
        break;
      case OpKind::conv1d:
        c.inputs = {R({2, 11, 3}), R({3, 3, 4})};
        c.attrs.conv = {2, 2, 1};
        break;
      case OpKind::relu:
        c.inputs = {away_from_zero(rng, {4, 5})};
        break;
      case OpKind::gelu:
      case OpKind::tanh:
      case OpKind::sigmoid:
      case OpKind::exp:
      case OpKind::transpose:
      case OpKind::l2_normalize:
        c.inputs = {R({2, 3, 4})};
        break;
      case OpKind::log:
      case OpKind::sqrt:
        c.inputs = {random_tensor(rng, {3, 4}, 0.5, 2.0)};
        break;
      case OpKind::softmax:
        c.inputs = {R({2, 5, 3})};
        c.attrs.axis = 1;
        break;
      case OpKind::mean:
      case OpKind::variance:
      case OpKind::sum:
        c.inputs = {R({3, 4, 2})};
        c.attrs.axis = 1;
        break;
      case OpKind::concat:
        c.inputs = {R({2, 3, 2}), R({2, 1, 2}), R({2, 4, 2})};
        c.attrs.axis = 1;
        break;
      case OpKind::slice:
        c.inputs = {R({3, 6})};
        c.attrs.axis = 1;
        c.attrs.begin = 1;
        c.attrs.end = 4;
        break;
      case OpKind::layernorm:
        c.inputs = {R({3, 5}), random_tensor(rng, {5}, 0.5, 1.5), R({5})};
        break;
      case OpKind::batchnorm:
        c.inputs = {R({6, 4}), random_tensor(rng, {4}, 0.5, 1.5), R({4})};
        c.attrs.bn.training = true;
        break;
      case OpKind::broadcast_add:
      case OpKind::broadcast_mul:
        c.inputs = {R({2, 3, 4}), R({2, 4})};
        break;
      case OpKind::weighted_sum:
        c.inputs = {R({3}), R({2, 4}), R({2, 4}), R({2, 4})};
        break;
      case OpKind::group_max:
        c.inputs = {R({3, 6})};
        c.attrs.group = 3;
        break;
      case OpKind::cross_entropy:
        c.inputs = {R({4, 5})};
        c.attrs.labels = {0, 3, 4, 1};
        break;
      case OpKind::angular_margin:
        c.inputs = {random_tensor(rng, {4, 5}, -0.9, 0.9)};
        c.attrs.labels = {2, 0, 4, 1};
        c.attrs.scalar = 0.3;
        break;
      case OpKind::detach:
        c.inputs = {R({3, 3})};
        break;
    }
    c.differentiable.assign(c.inputs.size(), true);
    cases.push_back(std::move(c));
  }
  return cases;
}

// Gradient check of sum(probe * op(inputs)). For detach the op is wrapped as
// x * detach(x): the numeric side holds the detached factor at its unperturbed
// value, so only the differentiable path is measured.
inline ad::GradcheckResult check_op(const OpCase& c, std::uint64_t seed = 7) {
  ad::ParameterSet<double> params;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    params.add("in" + std::to_string(i), c.inputs[i], c.differentiable[i]);
  }
  std::mt19937_64 rng(seed);
  const Tensor<double> probe_full = [&] {
    Tensor<double> out = c.kind == OpKind::detach
                             ? ad::mul(c.inputs[0], c.inputs[0])
                             : ad::tensor_op<double>(c.kind, c.inputs, c.attrs);
    return random_tensor(rng, out.shape().empty() ? Shape{} : out.shape(), 0.5, 1.5);
  }();
  const Tensor<double> frozen = c.inputs[0];
  ad::ScalarFunction fn = [c, probe_full, frozen](ad::ParameterSet<double>& p,
                                                  ad::Tape<double>* tape) {
    auto bound = ad::bind(p, tape);
    std::vector<Tensor<double>> ins;
    for (std::size_t i = 0; i < c.inputs.size(); ++i) ins.push_back(bound.at("in" + std::to_string(i)));
    Tensor<double> out;
    if (c.kind == OpKind::detach) {
      const Tensor<double> other = tape != nullptr ? ins[0] : frozen;
      out = ad::mul(ins[0], ad::tensor_op<double>(OpKind::detach, std::vector{other}, c.attrs));
    } else {
      out = ad::tensor_op<double>(c.kind, ins, c.attrs);
    }
    if (out.rank() == 0) return ad::mul(out, probe_full);
    return ad::sum_all(ad::mul(out, probe_full));
  };
  return ad::gradcheck(fn, params);
}

}  // namespace geolid::testing
