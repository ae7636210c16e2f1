// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geolid/data/manifest.hpp"

namespace geolid::data {

struct SamplingPlan {
  std::vector<std::string> languages;
  std::vector<double> probabilities;  // sums to 1
  double beta = 0.5;
};

// p_l proportional to count_l^beta.
SamplingPlan balanced_sampler(const std::map<std::string, std::size_t>& counts, double beta);

// Draws a language from the plan with a uniform variate u in [0, 1).
std::size_t draw_language(const SamplingPlan& plan, double u);

// Batches of utterance indices. Each batch draws languages from the plan and
// then utterances uniformly within the language, adding utterances while the
// audio budget allows (at least one). Batch k depends only on (seed, k), so
// the stream can be resumed at any position.
class BatchIterator {
 public:
  BatchIterator(const std::vector<ManifestEntry>& entries, const std::vector<std::size_t>& pool,
                SamplingPlan plan, double batch_seconds, std::uint64_t seed);

  std::vector<std::size_t> batch(std::uint64_t k) const;
  std::vector<std::size_t> next() { return batch(position_++); }
  std::uint64_t position() const noexcept { return position_; }
  void seek(std::uint64_t k) noexcept { position_ = k; }
  const SamplingPlan& plan() const noexcept { return plan_; }

 private:
  std::vector<double> seconds_;  // by entry index
  std::vector<std::vector<std::size_t>> by_language_;
  SamplingPlan plan_;
  double batch_seconds_;
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
};

}  // namespace geolid::data
