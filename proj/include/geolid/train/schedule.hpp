// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace geolid::train {

// Linear warmup lr_init -> lr_peak, constant hold, exponential decay
// lr_peak -> lr_final, then lr_final.
struct ScheduleConfig {
  std::uint64_t warmup = 5000;
  std::uint64_t hold = 20000;
  std::uint64_t decay = 75000;
  double lr_init = 6e-6;
  double lr_peak = 1e-5;
  double lr_final = 1e-6;

  std::uint64_t span() const noexcept { return warmup + hold + decay; }
};

double tri_stage_lr(std::uint64_t step, const ScheduleConfig& cfg);

// The default stage proportions (5% / 20% / 75%) applied to `total` steps.
ScheduleConfig scaled_schedule(std::uint64_t total, double lr_init, double lr_peak,
                               double lr_final);

}  // namespace geolid::train
