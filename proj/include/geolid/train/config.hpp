// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "geolid/io/config_file.hpp"
#include "geolid/model/config.hpp"
#include "geolid/train/adam.hpp"
#include "geolid/train/schedule.hpp"

namespace geolid::train {

// Everything a training run depends on. Mode, conditioning, the detach flag
// and the loss weights live in `model`.
struct TrainConfig {
  model::ModelConfig model = model::preset("desk");
  std::uint64_t steps = 1500;
  ScheduleConfig schedule = scaled_schedule(1500, 1e-4, 2e-3, 1e-4);
  AdamConfig adam;
  std::size_t accumulation = 1;
  double batch_seconds = 4.0;
  double sampling_beta = 0.5;
  std::uint64_t seed = 0;
  std::uint64_t checkpoint_interval = 250;

  // Throws ConfigError.
  void validate() const;
};

struct ConfigKey {
  std::string_view key;
  std::string_view help;
};

// Every key accepted by apply_config, in application order.
const std::vector<ConfigKey>& config_keys();

// "desk" (the directional experiment) or "tiny" (smoke runs).
TrainConfig train_preset(std::string_view name);

// Applies `values` on top of `cfg`. A `preset` key resets cfg first. When
// `steps` is given without any of warmup/hold/decay, the stage lengths are
// rescaled to the new total. Unknown keys and unparsable values throw
// ConfigError.
void apply_config(TrainConfig& cfg, const io::ConfigMap& values);

// Inverse of apply_config: every key with its current value.
io::ConfigMap to_config_map(const TrainConfig& cfg);

}  // namespace geolid::train
