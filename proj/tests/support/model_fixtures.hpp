// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Small model configurations and batches shared by the model tests and the
// acceptance binary.

#include <cmath>
#include <set>
#include <string>

#include "geolid/autodiff/gradcheck.hpp"
#include "geolid/model/check.hpp"
#include "geolid/model/model.hpp"
#include "geolid/util/seed.hpp"

namespace geolid::testing {

inline model::ModelConfig tiny_config(model::Mode mode, std::set<std::size_t> layers = {},
                                      model::CondShare share = model::CondShare::shared,
                                      model::CondFreeze freeze = model::CondFreeze::trainable) {
  auto c = model::preset("tiny");
  c.mode = mode;
  c.cond.layers = std::move(layers);
  c.cond.enabled = mode == model::Mode::geo_cond;
  c.cond.share = share;
  c.cond.freeze = freeze;
  return c;
}

using model::random_batch;

// Gradient of one loss term of a fresh forward pass.
enum class Term { total, class_loss, geo, geo_layer };

template <class T>
ad::Gradients<T> term_gradient(model::LIDModel<T>& m, const model::Batch<T>& batch, Term term,
                               std::size_t layer = 0) {
  ad::Tape<T> tape;
  auto tr = m.forward(batch, &tape, true);
  switch (term) {
    case Term::total: return ad::backward(*tr.loss_total, m.params());
    case Term::class_loss: return ad::backward(*tr.loss_class, m.params());
    case Term::geo: return ad::backward(*tr.loss_geo, m.params());
    case Term::geo_layer: return ad::backward(tr.loss_geo_layer.at(layer), m.params());
  }
  return {};
}

inline bool all_zero(const ad::Tensor<double>& t) {
  for (double v : t.data()) {
    if (v != 0.0) return false;
  }
  return true;
}

inline double max_abs(const ad::Tensor<double>& t) {
  double m = 0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

inline bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

inline ad::GradcheckResult model_gradcheck(const model::ModelConfig& cfg, std::uint64_t seed,
                                           std::size_t batch_size = 4) {
  return model::gradcheck_model(cfg, seed, batch_size);
}

}  // namespace geolid::testing
