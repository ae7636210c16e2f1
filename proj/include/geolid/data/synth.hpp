// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Synthetic "languages": a few formant sinusoids, amplitude-modulated at a
// language-specific syllable rate, plus white noise. Dialects scale the
// formants and jitter the modulation rate.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "geolid/geovec.hpp"

namespace geolid::data {

inline constexpr double kSampleRate = 8000.0;
inline constexpr std::string_view kDefaultDialect = "default";

struct DialectSpec {
  std::string id;
  std::array<double, 3> formant_shift{1.0, 1.0, 1.0};
  double modulation_jitter = 0.0;  // relative change of the modulation rate
};

struct SyntheticLanguageSpec {
  std::string code;
  std::array<double, 3> formants{};  // Hz
  std::array<double, 3> amplitudes{1.0, 0.6, 0.4};
  double modulation_rate = 4.0;    // Hz
  double modulation_depth = 0.5;
  double noise = 0.05;             // standard deviation of the white noise
  double formant_jitter = 0.02;    // per-utterance relative spread of formants
  geo::GeoCoordinate coord{0.0, 0.0};
  std::vector<DialectSpec> dialects{{std::string(kDefaultDialect), {1.0, 1.0, 1.0}, 0.0}};

  const DialectSpec& dialect(const std::string& id) const;  // NotFoundError if absent
  void validate() const;                                    // ConfigError
};

// Deterministic per (spec, dialect, seconds, seed).
std::vector<float> synth_utterance(const SyntheticLanguageSpec& spec, const std::string& dialect,
                                   double seconds, std::uint64_t seed);

// Twelve languages; the first four carry two extra dialects each.
std::vector<SyntheticLanguageSpec> default_languages();

}  // namespace geolid::data
