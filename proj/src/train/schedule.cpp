// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/train/schedule.hpp"

#include <cmath>

namespace geolid::train {

double tri_stage_lr(std::uint64_t step, const ScheduleConfig& c) {
  if (step < c.warmup) {
    const double f = static_cast<double>(step) / static_cast<double>(c.warmup);
    return c.lr_init + (c.lr_peak - c.lr_init) * f;
  }
  step -= c.warmup;
  if (step < c.hold) return c.lr_peak;
  step -= c.hold;
  if (step >= c.decay) return c.lr_final;
  const double f = static_cast<double>(step) / static_cast<double>(c.decay);
  return c.lr_peak * std::pow(c.lr_final / c.lr_peak, f);
}

ScheduleConfig scaled_schedule(std::uint64_t total, double lr_init, double lr_peak,
                               double lr_final) {
  ScheduleConfig c;
  c.warmup = total / 20;
  c.hold = total / 5;
  c.decay = total - c.warmup - c.hold;
  c.lr_init = lr_init;
  c.lr_peak = lr_peak;
  c.lr_final = lr_final;
  return c;
}

}  // namespace geolid::train
