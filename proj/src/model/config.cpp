// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/model/config.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geolid/errors.hpp"
#include "geolid/kernels/kernels.hpp"

namespace geolid::model {

std::set<std::size_t> ModelConfig::effective_layers() const {
  if (mode != Mode::geo_cond || !cond.enabled) return {};
  return cond.layers;
}

void ModelConfig::validate() const {
  const auto& e = encoder;
  if (e.layers < 1) throw ConfigError("encoder needs at least one layer");
  if (e.dim == 0 || e.heads == 0 || e.dim % e.heads != 0) {
    throw ConfigError("hidden size " + std::to_string(e.dim) + " not divisible by " +
                      std::to_string(e.heads) + " heads");
  }
  if (e.ffn == 0) throw ConfigError("feed-forward size must be positive");
  if (e.frontend.empty()) throw ConfigError("frontend needs at least one conv layer");
  for (const auto& c : e.frontend) {
    if (c.channels == 0 || c.kernel == 0 || c.stride == 0) {
      throw ConfigError("frontend conv specs must be positive");
    }
  }
  for (std::size_t n : cond.layers) {
    if (n >= e.layers) {
      throw ConfigError("conditioning layer " + std::to_string(n) + " outside [0, " +
                        std::to_string(e.layers - 1) + "]");
    }
  }
  const auto& h = head;
  if (h.channels == 0 || h.embedding == 0 || h.classes == 0 || h.geo_dim == 0 ||
      h.subcenters == 0 || h.pool_hidden == 0) {
    throw ConfigError("head sizes must be positive");
  }
  if (h.channels % 4 != 0) throw ConfigError("ECAPA channels must be divisible by 4");
  if (!(h.margin >= 0 && h.margin < std::numbers::pi / 2)) {
    throw ConfigError("margin must lie in [0, pi/2)");
  }
  if (!(h.scale > 0)) throw ConfigError("logit scale must be positive");
  if (!(loss.lambda >= 0 && loss.lambda <= 1)) throw ConfigError("lambda must lie in [0, 1]");
  if (!(loss.gamma >= 0 && loss.gamma <= 1)) throw ConfigError("gamma must lie in [0, 1]");
  if (!detach && mode == Mode::baseline) {
    throw ConfigError("disabling detach requires a geolocation mode");
  }
  if (samples < min_samples(e)) {
    throw ConfigError("waveform length " + std::to_string(samples) + " below the frontend minimum " +
                      std::to_string(min_samples(e)));
  }
  if (frames_for(e, samples) > e.max_frames) {
    throw ConfigError("frontend yields " + std::to_string(frames_for(e, samples)) +
                      " frames, above the cap " + std::to_string(e.max_frames));
  }
}

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::baseline: return "baseline";
    case Mode::geo_pred: return "geo-pred";
    case Mode::geo_cond: return "geo-cond";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "baseline") return Mode::baseline;
  if (text == "geo-pred") return Mode::geo_pred;
  if (text == "geo-cond") return Mode::geo_cond;
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

std::string_view share_name(CondShare share) {
  return share == CondShare::shared ? "shared" : "independent";
}

CondShare parse_share(std::string_view text) {
  if (text == "shared") return CondShare::shared;
  if (text == "independent") return CondShare::independent;
  throw ConfigError("unknown share mode '" + std::string(text) + "'");
}

std::string_view freeze_name(CondFreeze freeze) {
  return freeze == CondFreeze::frozen ? "frozen" : "trainable";
}

CondFreeze parse_freeze(std::string_view text) {
  if (text == "frozen") return CondFreeze::frozen;
  if (text == "trainable") return CondFreeze::trainable;
  throw ConfigError("unknown freeze mode '" + std::string(text) + "'");
}

std::set<std::size_t> layer_strategy(std::string_view spec, std::size_t layers) {
  if (spec == "none" || spec.empty()) return {};
  const std::size_t stride = std::max<std::size_t>(1, layers / 12);
  std::vector<std::size_t> full;
  for (std::size_t n = 0; n < layers; n += stride) full.push_back(n);
  if (full.size() > 12) full.resize(12);
  if (spec == "full") return {full.begin(), full.end()};
  const std::size_t third = (full.size() + 2) / 3;
  auto part = [&](std::size_t i) {
    std::set<std::size_t> out;
    for (std::size_t j = i * third; j < std::min(full.size(), (i + 1) * third); ++j) {
      out.insert(full[j]);
    }
    return out;
  };
  if (spec == "bottom") return part(0);
  if (spec == "middle") return part(1);
  if (spec == "top") return part(2);

  std::set<std::size_t> out;
  std::stringstream ss{std::string(spec)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("bad layer spec '" + std::string(spec) + "'");
    }
    if (v >= layers) {
      throw ConfigError("layer " + item + " outside a " + std::to_string(layers) + "-layer stack");
    }
    out.insert(v);
  }
  return out;
}

std::string layers_str(const std::set<std::size_t>& layers) {
  if (layers.empty()) return "none";
  std::string out;
  for (std::size_t n : layers) {
    if (!out.empty()) out += ',';
    out += std::to_string(n);
  }
  return out;
}

ModelConfig preset(std::string_view name) {
  ModelConfig c;
  if (name == "desk") return c;
  if (name == "tiny") {
    c.encoder.frontend = {{4, 4, 2}};
    c.encoder.layers = 2;
    c.encoder.dim = 8;
    c.encoder.heads = 2;
    c.encoder.ffn = 16;
    c.encoder.max_frames = 12;
    c.head.channels = 8;
    c.head.embedding = 4;
    c.head.classes = 3;
    c.head.geo_dim = 6;
    c.head.subcenters = 2;
    c.head.pool_hidden = 4;
    c.samples = 26;  // 12 frames
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::size_t min_samples(const EncoderConfig& encoder) {
  std::size_t need = 1;
  for (auto it = encoder.frontend.rbegin(); it != encoder.frontend.rend(); ++it) {
    need = (need - 1) * it->stride + it->kernel;
  }
  return need;
}

std::size_t frames_for(const EncoderConfig& encoder, std::size_t samples) {
  std::size_t t = samples;
  for (const auto& c : encoder.frontend) {
    if (t < c.kernel) return 0;
    t = kernels::conv_out_len(t, c.kernel, c.stride, 1, 0);
  }
  return t;
}

}  // namespace geolid::model
