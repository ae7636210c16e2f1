// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/data/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "geolid/errors.hpp"
#include "geolid/util/seed.hpp"

namespace geolid::data {

SamplingPlan balanced_sampler(const std::map<std::string, std::size_t>& counts, double beta) {
  if (counts.empty()) throw std::invalid_argument("balanced_sampler: no languages");
  if (!(beta >= 0 && beta <= 1)) {
    throw std::invalid_argument("balanced_sampler: beta " + std::to_string(beta) +
                                " outside [0, 1]");
  }
  SamplingPlan plan;
  plan.beta = beta;
  double total = 0;
  for (const auto& [lang, n] : counts) {
    if (n == 0) throw std::invalid_argument("balanced_sampler: language '" + lang + "' has no utterances");
    plan.languages.push_back(lang);
    plan.probabilities.push_back(std::pow(static_cast<double>(n), beta));
    total += plan.probabilities.back();
  }
  for (double& p : plan.probabilities) p /= total;
  return plan;
}

std::size_t draw_language(const SamplingPlan& plan, double u) {
  double acc = 0;
  for (std::size_t i = 0; i + 1 < plan.probabilities.size(); ++i) {
    acc += plan.probabilities[i];
    if (u < acc) return i;
  }
  return plan.probabilities.size() - 1;
}

BatchIterator::BatchIterator(const std::vector<ManifestEntry>& entries,
                             const std::vector<std::size_t>& pool, SamplingPlan plan,
                             double batch_seconds, std::uint64_t seed)
    : plan_(std::move(plan)), batch_seconds_(batch_seconds), seed_(seed) {
  if (pool.empty()) throw std::invalid_argument("batch iterator: empty utterance pool");
  if (!(batch_seconds > 0)) throw std::invalid_argument("batch iterator: budget must be positive");
  seconds_.reserve(entries.size());
  for (const auto& e : entries) seconds_.push_back(e.seconds);
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < plan_.languages.size(); ++i) slot[plan_.languages[i]] = i;
  by_language_.resize(plan_.languages.size());
  for (std::size_t idx : pool) {
    auto it = slot.find(entries.at(idx).lang);
    if (it == slot.end()) {
      throw ConfigError("language '" + entries[idx].lang + "' is missing from the sampling plan");
    }
    by_language_[it->second].push_back(idx);
  }
  for (std::size_t i = 0; i < by_language_.size(); ++i) {
    if (by_language_[i].empty() && plan_.probabilities[i] > 0) {
      throw ConfigError("sampling plan draws '" + plan_.languages[i] + "' but it has no utterances");
    }
  }
}

std::vector<std::size_t> BatchIterator::batch(std::uint64_t k) const {
  SplitMix rng(derive_seed(seed_, k));
  std::vector<std::size_t> out;
  double used = 0;
  while (true) {
    const auto& pool = by_language_[draw_language(plan_, rng.uniform())];
    const std::size_t idx = pool[rng.below(pool.size())];
    if (!out.empty() && used + seconds_[idx] > batch_seconds_ + 1e-9) break;
    out.push_back(idx);
    used += seconds_[idx];
  }
  return out;
}

}  // namespace geolid::data
