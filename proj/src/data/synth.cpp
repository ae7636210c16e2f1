// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/data/synth.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "geolid/errors.hpp"
#include "geolid/util/seed.hpp"

namespace geolid::data {

const DialectSpec& SyntheticLanguageSpec::dialect(const std::string& id) const {
  for (const auto& d : dialects) {
    if (d.id == id) return d;
  }
  throw NotFoundError("language '" + code + "' has no dialect '" + id + "'");
}

void SyntheticLanguageSpec::validate() const {
  const double nyquist = kSampleRate / 2;
  if (code.empty()) throw ConfigError("language code must not be empty");
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(formants[i] > 0 && formants[i] < nyquist)) {
      throw ConfigError(code + ": formant " + std::to_string(formants[i]) + " Hz outside (0, " +
                        std::to_string(nyquist) + ")");
    }
    if (amplitudes[i] < 0) throw ConfigError(code + ": negative formant amplitude");
  }
  if (!(modulation_rate > 0)) throw ConfigError(code + ": modulation rate must be positive");
  if (!(noise >= 0)) throw ConfigError(code + ": noise must be non-negative");
  if (dialects.empty()) throw ConfigError(code + ": needs at least one dialect");
  std::set<std::string> ids;
  for (const auto& d : dialects) {
    if (!ids.insert(d.id).second) throw ConfigError(code + ": dialect '" + d.id + "' listed twice");
    for (std::size_t i = 0; i < 3; ++i) {
      const double f = formants[i] * d.formant_shift[i] * (1 + formant_jitter);
      if (!(d.formant_shift[i] > 0 && f < nyquist)) {
        throw ConfigError(code + "/" + d.id + ": shifted formant outside (0, Nyquist)");
      }
    }
  }
  if (ids.count(std::string(kDefaultDialect)) == 0) {
    throw ConfigError(code + ": missing the default dialect");
  }
}

std::vector<float> synth_utterance(const SyntheticLanguageSpec& spec, const std::string& dialect,
                                   double seconds, std::uint64_t seed) {
  const DialectSpec& d = spec.dialect(dialect);
  if (!(seconds >= 0.5 && seconds <= 10.0)) {
    throw std::invalid_argument("utterance duration " + std::to_string(seconds) +
                                " s outside [0.5, 10]");
  }
  constexpr double two_pi = 2 * std::numbers::pi;
  SplitMix rng(seed);
  auto spread = [&] { return 1.0 + spec.formant_jitter * (2 * rng.uniform() - 1); };

  std::array<double, 3> freq{}, phase{};
  double amp_sum = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    freq[i] = spec.formants[i] * d.formant_shift[i] * spread();
    phase[i] = two_pi * rng.uniform();
    amp_sum += spec.amplitudes[i];
  }
  const double rate = spec.modulation_rate * (1 + d.modulation_jitter) * spread();
  const double mod_phase = two_pi * rng.uniform();
  const double gain = amp_sum > 0 ? 1.0 / amp_sum : 1.0;

  const auto n = static_cast<std::size_t>(std::llround(seconds * kSampleRate));
  std::vector<float> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double time = static_cast<double>(t) / kSampleRate;
    double s = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (spec.amplitudes[i] != 0) s += spec.amplitudes[i] * std::sin(two_pi * freq[i] * time + phase[i]);
    }
    s *= gain * (1 + spec.modulation_depth * std::sin(two_pi * rate * time + mod_phase));
    out[t] = static_cast<float>(s);
  }
  if (spec.noise > 0) {
    for (std::size_t t = 0; t < n; t += 2) {
      // Box-Muller; one uniform pair yields two samples.
      const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
      const double r = std::sqrt(-2 * std::log(u1));
      out[t] += static_cast<float>(spec.noise * r * std::cos(two_pi * u2));
      if (t + 1 < n) out[t + 1] += static_cast<float>(spec.noise * r * std::sin(two_pi * u2));
    }
  }
  return out;
}

std::vector<SyntheticLanguageSpec> default_languages() {
  struct Row {
    const char* code;
    double f1, f2, f3, rate, lat, lon;
  };
  static constexpr Row rows[] = {
      {"eng", 500, 1500, 2500, 4.0, 52.0, -1.0},   {"spa", 700, 1200, 2600, 5.5, 40.0, -4.0},
      {"ara", 400, 1800, 2900, 4.5, 24.0, 45.0},   {"cmn", 600, 1000, 3200, 3.5, 34.0, 110.0},
      {"deu", 450, 1350, 2450, 4.2, 51.0, 10.0},   {"fra", 550, 1650, 2700, 4.8, 47.0, 2.0},
      {"ita", 650, 1400, 2800, 5.2, 42.0, 12.0},   {"rus", 350, 1250, 2350, 3.8, 56.0, 38.0},
      {"hin", 750, 1700, 3000, 5.0, 25.0, 78.0},   {"jpn", 600, 1900, 3400, 6.0, 36.0, 138.0},
      {"swa", 800, 1550, 3100, 4.4, -6.0, 35.0},   {"por", 500, 1100, 2750, 5.8, -10.0, -52.0},
  };
  std::vector<SyntheticLanguageSpec> out;
  for (std::size_t i = 0; i < std::size(rows); ++i) {
    const Row& r = rows[i];
    SyntheticLanguageSpec s;
    s.code = r.code;
    s.formants = {r.f1, r.f2, r.f3};
    s.modulation_rate = r.rate;
    s.coord = geo::GeoCoordinate(r.lat, r.lon);
    if (i < 4) {
      s.dialects.push_back({"d1", {1.06, 0.95, 1.02}, 0.1});
      s.dialects.push_back({"d2", {0.94, 1.05, 0.98}, -0.1});
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace geolid::data
