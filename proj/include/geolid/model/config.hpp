// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace geolid::model {

struct ConvSpec {
  std::size_t channels = 32;
  std::size_t kernel = 4;
  std::size_t stride = 2;
};

struct EncoderConfig {
  std::vector<ConvSpec> frontend{{32, 10, 5}, {32, 8, 4}, {32, 4, 2}, {32, 4, 2}};
  std::size_t layers = 6;    // N
  std::size_t dim = 64;      // D
  std::size_t heads = 4;
  std::size_t ffn = 128;
  std::size_t max_frames = 64;
};

enum class CondShare { shared, independent };
enum class CondFreeze { frozen, trainable };

struct CondConfig {
  std::set<std::size_t> layers;  // M; injection after the output of layer n
  CondShare share = CondShare::shared;
  CondFreeze freeze = CondFreeze::trainable;
  bool enabled = false;
};

struct HeadConfig {
  std::size_t channels = 64;   // C
  std::size_t embedding = 32;  // E
  std::size_t classes = 12;
  std::size_t geo_dim = 64;    // lattice point count
  std::size_t subcenters = 3;  // K
  double margin = 0.5;         // m, radians
  double scale = 30.0;         // s_scale
  std::size_t pool_hidden = 32;
};

struct LossConfig {
  double lambda = 0.2;
  double gamma = 0.4;
};

enum class Mode { baseline, geo_pred, geo_cond };

struct ModelConfig {
  EncoderConfig encoder;
  CondConfig cond;
  HeadConfig head;
  LossConfig loss;
  Mode mode = Mode::baseline;
  bool detach = true;
  std::size_t samples = 4000;  // waveform length per utterance

  // Layers that actually carry conditioning: M when the mode and flag allow it.
  std::set<std::size_t> effective_layers() const;

  // Throws ConfigError on violated invariants.
  void validate() const;
};

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view text);
std::string_view share_name(CondShare share);
CondShare parse_share(std::string_view text);
std::string_view freeze_name(CondFreeze freeze);
CondFreeze parse_freeze(std::string_view text);

// Layer selection for an N-layer stack. `full` takes every max(1, N/12)-th
// index below N; `bottom`, `middle` and `top` are its thirds (a 48-layer stack
// gives {0,4,8,12}, {16,...,28}, {32,...,44}). `none` is the empty set;
// anything else is a comma separated index list.
std::set<std::size_t> layer_strategy(std::string_view spec, std::size_t layers);
std::string layers_str(const std::set<std::size_t>& layers);

// Named presets: "tiny" (gradient checks), "desk" (directional experiment).
ModelConfig preset(std::string_view name);

// Minimum waveform length the frontend accepts.
std::size_t min_samples(const EncoderConfig& encoder);
// Frames after the frontend for a waveform of `samples`.
std::size_t frames_for(const EncoderConfig& encoder, std::size_t samples);

}  // namespace geolid::model
