// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/train/adam.hpp"

#include <cmath>

#include "geolid/errors.hpp"

namespace geolid::train {

template <class T>
void adam_step(ad::ParameterSet<T>& params, const ad::Gradients<T>& grads, AdamState<T>& state,
               double lr, const AdamConfig& cfg) {
  for (const auto& [name, p] : params) {
    if (!p.trainable || p.kind != ad::ParamKind::weight) continue;
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    if (it->second.size() != p.value.size()) {
      throw ShapeError("adam: gradient of '" + name + "' has the wrong size");
    }
    for (T g : it->second.data()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw NumericError("non-finite gradient for parameter '" + name + "'");
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t), c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [name, p] : params) {
    if (!p.trainable || p.kind != ad::ParamKind::weight) continue;
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    const auto g = it->second.data();
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) {
      m.assign(g.size(), T(0));
      v.assign(g.size(), T(0));
    }
    auto w = p.value.mutable_data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = g[i];
      const double mi = cfg.beta1 * m[i] + (1 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * v[i] + (1 - cfg.beta2) * gi * gi;
      m[i] = T(mi);
      v[i] = T(vi);
      w[i] = T(w[i] - lr * (mi / c1) / (std::sqrt(vi / c2) + cfg.eps));
    }
  }
}

template void adam_step(ad::ParameterSet<float>&, const ad::Gradients<float>&, AdamState<float>&,
                        double, const AdamConfig&);
template void adam_step(ad::ParameterSet<double>&, const ad::Gradients<double>&,
                        AdamState<double>&, double, const AdamConfig&);

}  // namespace geolid::train
