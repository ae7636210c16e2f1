// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/model/check.hpp"

#include "geolid/util/seed.hpp"

namespace geolid::model {

template <class T>
Batch<T> random_batch(const ModelConfig& cfg, std::size_t size, std::uint64_t seed) {
  SplitMix rng(seed);
  Batch<T> b;
  b.waves = ad::Tensor<T>({size, cfg.samples});
  for (auto& v : b.waves.mutable_data()) v = T(rng.uniform(-1, 1));
  b.geo = ad::Tensor<T>({size, cfg.head.geo_dim});
  for (auto& v : b.geo.mutable_data()) v = T(rng.uniform());
  for (std::size_t i = 0; i < size; ++i) b.labels.push_back(static_cast<int>(i % cfg.head.classes));
  return b;
}

template Batch<float> random_batch(const ModelConfig&, std::size_t, std::uint64_t);
template Batch<double> random_batch(const ModelConfig&, std::size_t, std::uint64_t);

ad::GradcheckResult gradcheck_model(const ModelConfig& cfg, std::uint64_t seed,
                                    std::size_t batch_size, const ad::GradcheckOptions& options) {
  LIDModel<double> m(cfg, seed);
  const auto batch = random_batch<double>(cfg, batch_size, derive_seed(seed, "batch"));
  const auto pinned = m.forward(batch, nullptr, true).inter_pred;
  ad::ScalarFunction fn = [&m, &pinned, &batch](ad::ParameterSet<double>& ps, ad::Tape<double>* tape) {
    for (const auto& [name, p] : ps) m.params().set_value(name, p.value);
    return *m.forward(batch, tape, true, &pinned).loss_total;
  };
  return ad::gradcheck(fn, m.params(), options);
}

}  // namespace geolid::model
