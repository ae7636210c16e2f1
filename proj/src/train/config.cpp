// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/train/config.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

#include "geolid/errors.hpp"

namespace geolid::train {

namespace {

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return v;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

// Shortest form that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// "32:10:5,32:8:4" -> channels:kernel:stride per layer.
std::vector<model::ConvSpec> parse_frontend(const std::string& text) {
  std::vector<model::ConvSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    model::ConvSpec c;
    char a = 0, b = 0;
    std::istringstream is(item);
    if (!(is >> c.channels >> a >> c.kernel >> b >> c.stride) || a != ':' || b != ':' ||
        !(is >> std::ws).eof()) {
      throw ConfigError("frontend: bad layer '" + item + "', expected channels:kernel:stride");
    }
    out.push_back(c);
  }
  if (out.empty()) throw ConfigError("frontend: no layers");
  return out;
}

std::string frontend_str(const std::vector<model::ConvSpec>& layers) {
  std::string s;
  for (const auto& c : layers) {
    if (!s.empty()) s += ',';
    s += std::to_string(c.channels) + ':' + std::to_string(c.kernel) + ':' + std::to_string(c.stride);
  }
  return s;
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (steps == 0) throw ConfigError("steps must be positive");
  if (schedule.span() > steps) {
    throw ConfigError("warmup + hold + decay (" + std::to_string(schedule.span()) +
                      ") exceeds steps (" + std::to_string(steps) + ")");
  }
  if (!(schedule.lr_init > 0 && schedule.lr_peak > 0 && schedule.lr_final > 0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (accumulation < 1) throw ConfigError("accumulation must be at least 1");
  if (!(batch_seconds > 0)) throw ConfigError("batch_seconds must be positive");
  if (sampling_beta < 0 || sampling_beta > 1) throw ConfigError("beta must lie in [0, 1]");
  if (checkpoint_interval == 0) throw ConfigError("checkpoint_interval must be positive");
  if (!(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1 && adam.eps > 0)) {
    throw ConfigError("adam: betas must lie in [0, 1) and eps must be positive");
  }
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"preset", "base configuration: desk or tiny"},
      {"steps", "optimizer steps"},
      {"warmup", "linear warmup steps"},
      {"hold", "constant learning-rate steps"},
      {"decay", "exponential decay steps"},
      {"lr_init", "learning rate at step 0"},
      {"lr_peak", "learning rate after warmup"},
      {"lr_final", "learning rate after decay"},
      {"adam_beta1", "Adam first-moment decay"},
      {"adam_beta2", "Adam second-moment decay"},
      {"adam_eps", "Adam denominator epsilon"},
      {"accumulation", "micro-batches per optimizer step"},
      {"batch_seconds", "audio seconds per micro-batch"},
      {"beta", "language sampling exponent, p ~ count^beta"},
      {"seed", "root random seed"},
      {"checkpoint_interval", "steps between checkpoints and dev evaluations"},
      {"frontend", "conv frontend as channels:kernel:stride,..."},
      {"enc_layers", "encoder layers N"},
      {"dim", "encoder width D"},
      {"heads", "attention heads"},
      {"ffn", "feed-forward width"},
      {"max_frames", "longest frame sequence accepted"},
      {"samples", "waveform samples per utterance"},
      {"channels", "ECAPA channels C"},
      {"embedding", "embedding size E"},
      {"classes", "number of languages"},
      {"geo_dim", "geolocation vector length (lattice points)"},
      {"subcenters", "classifier sub-centers K"},
      {"margin", "angular margin in radians"},
      {"scale", "logit scale"},
      {"pool_hidden", "attention width in statistics pooling"},
      {"mode", "baseline, geo-pred or geo-cond"},
      {"layers", "conditioned layers: full, bottom, middle, top, none or a list"},
      {"cond_share", "shared or independent CondProj"},
      {"cond_freeze", "frozen or trainable CondProj"},
      {"detach", "stop gradients into the conditioning path"},
      {"lambda", "weight of the geolocation losses"},
      {"gamma", "share of the intermediate geolocation losses"},
  };
  return keys;
}

TrainConfig train_preset(std::string_view name) {
  TrainConfig c;
  c.model = model::preset(name);
  if (name == "tiny") {
    c.steps = 50;
    c.schedule = scaled_schedule(50, 1e-3, 1e-2, 1e-3);
    c.batch_seconds = 4.0;
    c.checkpoint_interval = 25;
  }
  return c;
}

void apply_config(TrainConfig& cfg, const io::ConfigMap& values) {
  std::map<std::string, std::string> rest = values;
  auto take = [&](std::string_view key) -> std::optional<std::string> {
    auto it = rest.find(std::string(key));
    if (it == rest.end()) return std::nullopt;
    std::string v = it->second;
    rest.erase(it);
    return v;
  };
  for (const auto& [key, value] : rest) {
    bool known = false;
    for (const auto& k : config_keys()) known = known || k.key == key;
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }

  if (auto v = take("preset")) cfg = train_preset(*v);
  auto& m = cfg.model;
  auto u = [&](const char* key, auto& field) {
    if (auto v = take(key)) field = static_cast<std::remove_reference_t<decltype(field)>>(to_uint(key, *v));
  };
  auto d = [&](const char* key, double& field) {
    if (auto v = take(key)) field = to_double(key, *v);
  };

  if (auto v = take("frontend")) m.encoder.frontend = parse_frontend(*v);
  u("enc_layers", m.encoder.layers);
  u("dim", m.encoder.dim);
  u("heads", m.encoder.heads);
  u("ffn", m.encoder.ffn);
  u("max_frames", m.encoder.max_frames);
  u("samples", m.samples);
  u("channels", m.head.channels);
  u("embedding", m.head.embedding);
  u("classes", m.head.classes);
  u("geo_dim", m.head.geo_dim);
  u("subcenters", m.head.subcenters);
  d("margin", m.head.margin);
  d("scale", m.head.scale);
  u("pool_hidden", m.head.pool_hidden);
  if (auto v = take("mode")) {
    m.mode = model::parse_mode(*v);
    m.cond.enabled = m.mode == model::Mode::geo_cond;
  }
  if (auto v = take("layers")) m.cond.layers = model::layer_strategy(*v, m.encoder.layers);
  if (auto v = take("cond_share")) m.cond.share = model::parse_share(*v);
  if (auto v = take("cond_freeze")) m.cond.freeze = model::parse_freeze(*v);
  if (auto v = take("detach")) m.detach = to_bool("detach", *v);
  d("lambda", m.loss.lambda);
  d("gamma", m.loss.gamma);

  const bool stages = values.count("warmup") || values.count("hold") || values.count("decay");
  u("steps", cfg.steps);
  d("lr_init", cfg.schedule.lr_init);
  d("lr_peak", cfg.schedule.lr_peak);
  d("lr_final", cfg.schedule.lr_final);
  if (!stages) {
    cfg.schedule = scaled_schedule(cfg.steps, cfg.schedule.lr_init, cfg.schedule.lr_peak,
                                   cfg.schedule.lr_final);
  }
  u("warmup", cfg.schedule.warmup);
  u("hold", cfg.schedule.hold);
  u("decay", cfg.schedule.decay);
  d("adam_beta1", cfg.adam.beta1);
  d("adam_beta2", cfg.adam.beta2);
  d("adam_eps", cfg.adam.eps);
  u("accumulation", cfg.accumulation);
  d("batch_seconds", cfg.batch_seconds);
  d("beta", cfg.sampling_beta);
  u("seed", cfg.seed);
  u("checkpoint_interval", cfg.checkpoint_interval);
}

io::ConfigMap to_config_map(const TrainConfig& cfg) {
  const auto& m = cfg.model;
  return {
      {"steps", std::to_string(cfg.steps)},
      {"warmup", std::to_string(cfg.schedule.warmup)},
      {"hold", std::to_string(cfg.schedule.hold)},
      {"decay", std::to_string(cfg.schedule.decay)},
      {"lr_init", num(cfg.schedule.lr_init)},
      {"lr_peak", num(cfg.schedule.lr_peak)},
      {"lr_final", num(cfg.schedule.lr_final)},
      {"adam_beta1", num(cfg.adam.beta1)},
      {"adam_beta2", num(cfg.adam.beta2)},
      {"adam_eps", num(cfg.adam.eps)},
      {"accumulation", std::to_string(cfg.accumulation)},
      {"batch_seconds", num(cfg.batch_seconds)},
      {"beta", num(cfg.sampling_beta)},
      {"seed", std::to_string(cfg.seed)},
      {"checkpoint_interval", std::to_string(cfg.checkpoint_interval)},
      {"frontend", frontend_str(m.encoder.frontend)},
      {"enc_layers", std::to_string(m.encoder.layers)},
      {"dim", std::to_string(m.encoder.dim)},
      {"heads", std::to_string(m.encoder.heads)},
      {"ffn", std::to_string(m.encoder.ffn)},
      {"max_frames", std::to_string(m.encoder.max_frames)},
      {"samples", std::to_string(m.samples)},
      {"channels", std::to_string(m.head.channels)},
      {"embedding", std::to_string(m.head.embedding)},
      {"classes", std::to_string(m.head.classes)},
      {"geo_dim", std::to_string(m.head.geo_dim)},
      {"subcenters", std::to_string(m.head.subcenters)},
      {"margin", num(m.head.margin)},
      {"scale", num(m.head.scale)},
      {"pool_hidden", std::to_string(m.head.pool_hidden)},
      {"mode", std::string(model::mode_name(m.mode))},
      {"layers", model::layers_str(m.cond.layers)},
      {"cond_share", std::string(model::share_name(m.cond.share))},
      {"cond_freeze", std::string(model::freeze_name(m.cond.freeze))},
      {"detach", m.detach ? "true" : "false"},
      {"lambda", num(m.loss.lambda)},
      {"gamma", num(m.loss.gamma)},
  };
}

}  // namespace geolid::train
