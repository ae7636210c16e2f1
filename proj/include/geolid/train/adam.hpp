// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geolid/autodiff/params.hpp"

namespace geolid::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
};

template <class T>
struct AdamState {
  std::uint64_t step = 0;
  std::map<std::string, std::vector<T>> m, v;
};

// One bias-corrected Adam update of every trainable weight. Frozen weights
// and buffers are left untouched. A non-finite gradient throws NumericError
// naming the parameter, before anything is modified.
template <class T>
void adam_step(ad::ParameterSet<T>& params, const ad::Gradients<T>& grads, AdamState<T>& state,
               double lr, const AdamConfig& cfg = {});

}  // namespace geolid::train
