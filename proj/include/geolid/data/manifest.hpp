// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geolid/data/synth.hpp"
#include "geolid/geovec.hpp"

namespace geolid::data {

inline constexpr std::string_view kTrain = "train";
inline constexpr std::string_view kDev = "dev";
inline constexpr std::string_view kDialectDev = "dialect-dev";

bool valid_split(std::string_view split);

struct ManifestEntry {
  std::string id;
  std::string lang;
  std::string dialect;
  std::string split;
  double seconds = 0;
  std::optional<std::uint64_t> seed;  // regenerate from the language spec
  std::optional<std::string> path;    // signal file, relative to the manifest
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// One JSON object per line.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct SplitCounts {
  std::size_t train = 60;        // per language
  std::size_t dev = 20;          // per language
  std::size_t dialect_dev = 20;  // per extra dialect
};

struct CorpusOptions {
  SplitCounts counts;
  double seconds = 0.5;
  std::uint64_t seed = 0;
};

// Entries only; signals are described by their seeds. Train and dev use the
// default dialect; dialect-dev holds the extra dialects.
std::vector<ManifestEntry> plan_corpus(const std::vector<SyntheticLanguageSpec>& specs,
                                       const CorpusOptions& options);

// Writes manifest.jsonl, languages.csv and signals/<id>.f32 under `dir`.
std::vector<ManifestEntry> gen_corpus(const std::vector<SyntheticLanguageSpec>& specs,
                                      const CorpusOptions& options,
                                      const std::filesystem::path& dir);

// Signal of an entry: read from its file when it has a path, otherwise
// synthesized from its seed.
std::vector<float> load_signal(const ManifestEntry& entry, const std::filesystem::path& root,
                               const std::vector<SyntheticLanguageSpec>& specs);

void write_signal(const std::filesystem::path& path, const std::vector<float>& samples);
std::vector<float> read_signal(const std::filesystem::path& path);

// Language table over a Fibonacci lattice of `points`.
geo::LanguageGeoTable language_table(const std::vector<SyntheticLanguageSpec>& specs,
                                     std::size_t points);
void write_language_csv(const std::filesystem::path& path,
                        const std::vector<SyntheticLanguageSpec>& specs);

// Utterances held in memory with class indices and geolocation targets.
struct Dataset {
  std::vector<ManifestEntry> entries;
  std::vector<std::vector<float>> signals;
  std::vector<std::string> languages;  // class index -> code, sorted
  std::map<std::string, int> label_of;
  geo::LanguageGeoTable geo;

  std::size_t size() const { return entries.size(); }
  int label(std::size_t i) const { return label_of.at(entries[i].lang); }
  const std::vector<double>& target(std::size_t i) const {
    return geo.at(entries[i].lang).vector.values;
  }
  std::vector<std::size_t> indices(std::string_view split) const;
};

Dataset load_dataset(const std::vector<ManifestEntry>& entries, const std::filesystem::path& root,
                     const std::vector<SyntheticLanguageSpec>& specs, std::size_t geo_points);

}  // namespace geolid::data
