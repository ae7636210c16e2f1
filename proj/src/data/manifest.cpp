// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/data/manifest.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "geolid/errors.hpp"
#include "geolid/util/seed.hpp"
#include "json.hpp"

namespace geolid::data {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "signal files are little-endian");

bool valid_split(std::string_view split) {
  return split == kTrain || split == kDev || split == kDialectDev;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const auto& e : entries) {
    json j = json::object();
    j["id"] = e.id;
    j["lang"] = e.lang;
    j["dialect"] = e.dialect;
    j["split"] = e.split;
    j["seconds"] = e.seconds;
    if (e.path) j["path"] = *e.path;
    if (e.seed) j["seed"] = *e.seed;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  static const std::set<std::string> known{"id", "lang", "dialect", "split", "seconds", "seed", "path"};
  std::vector<ManifestEntry> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ManifestEntry e;
    try {
      const json j = json::parse(line);
      for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ParseError("unknown field '" + key + "'", no);
      }
      e.id = j.at("id").get<std::string>();
      e.lang = j.at("lang").get<std::string>();
      e.dialect = j.at("dialect").get<std::string>();
      e.split = j.at("split").get<std::string>();
      e.seconds = j.at("seconds").get<double>();
      if (j.contains("seed")) e.seed = j["seed"].get<std::uint64_t>();
      if (j.contains("path")) e.path = j["path"].get<std::string>();
    } catch (const json::exception& ex) {
      throw ParseError(std::string("bad manifest record: ") + ex.what(), no);
    }
    if (!valid_split(e.split)) throw ParseError("unknown split '" + e.split + "'", no);
    if (!e.seed && !e.path) throw ParseError("record needs a seed or a path", no);
    if (!ids.insert(e.id).second) throw DuplicateKeyError("utterance '" + e.id + "' listed twice");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> plan_corpus(const std::vector<SyntheticLanguageSpec>& specs,
                                       const CorpusOptions& options) {
  if (specs.size() < 2) throw ConfigError("a corpus needs at least two languages");
  std::set<std::string> codes;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].validate();
    if (!codes.insert(specs[i].code).second) {
      throw ConfigError("language '" + specs[i].code + "' listed twice");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (specs[i].coord == specs[j].coord) {
        throw ConfigError("languages '" + specs[j].code + "' and '" + specs[i].code +
                          "' share a coordinate");
      }
    }
  }
  std::vector<ManifestEntry> out;
  auto add = [&](const SyntheticLanguageSpec& s, const std::string& dialect,
                 std::string_view split, std::size_t k) {
    char num[16];
    std::snprintf(num, sizeof num, "%04zu", k);
    ManifestEntry e;
    e.id = s.code + (dialect == kDefaultDialect ? "" : "." + dialect) + "-" + std::string(split) +
           "-" + num;
    e.lang = s.code;
    e.dialect = dialect;
    e.split = split;
    e.seconds = options.seconds;
    e.seed = derive_seed(options.seed, e.id);
    out.push_back(std::move(e));
  };
  const std::string base(kDefaultDialect);
  for (const auto& s : specs) {
    for (std::size_t k = 0; k < options.counts.train; ++k) add(s, base, kTrain, k);
    for (std::size_t k = 0; k < options.counts.dev; ++k) add(s, base, kDev, k);
    for (const auto& d : s.dialects) {
      if (d.id == kDefaultDialect) continue;
      for (std::size_t k = 0; k < options.counts.dialect_dev; ++k) add(s, d.id, kDialectDev, k);
    }
  }
  return out;
}

std::vector<ManifestEntry> gen_corpus(const std::vector<SyntheticLanguageSpec>& specs,
                                      const CorpusOptions& options, const fs::path& dir) {
  auto entries = plan_corpus(specs, options);
  fs::create_directories(dir / "signals");
  std::map<std::string, const SyntheticLanguageSpec*> by_code;
  for (const auto& s : specs) by_code[s.code] = &s;

  // Each utterance owns its seed, so the loop order does not matter.
  std::vector<std::string> errors(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& e = entries[i];
    try {
      const auto signal = synth_utterance(*by_code.at(e.lang), e.dialect, e.seconds, *e.seed);
      const std::string rel = "signals/" + e.id + ".f32";
      write_signal(dir / rel, signal);
      e.path = rel;
      e.seed.reset();
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  }
  for (const auto& err : errors) {
    if (!err.empty()) throw IoError("corpus generation failed: " + err);
  }
  write_manifest(dir / "manifest.jsonl", entries);
  write_language_csv(dir / "languages.csv", specs);
  return entries;
}

void write_signal(const fs::path& path, const std::vector<float>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write signal " + path.string());
  out.write(reinterpret_cast<const char*>(samples.data()),
            static_cast<std::streamsize>(samples.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<float> read_signal(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open signal " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % sizeof(float) != 0) throw IoError("truncated signal file " + path.string());
  std::vector<float> out(bytes / sizeof(float));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("read failed: " + path.string());
  return out;
}

std::vector<float> load_signal(const ManifestEntry& entry, const fs::path& root,
                               const std::vector<SyntheticLanguageSpec>& specs) {
  if (entry.path) return read_signal(root / *entry.path);
  for (const auto& s : specs) {
    if (s.code == entry.lang) return synth_utterance(s, entry.dialect, entry.seconds, *entry.seed);
  }
  throw NotFoundError("no synthesis spec for language '" + entry.lang + "'");
}

geo::LanguageGeoTable language_table(const std::vector<SyntheticLanguageSpec>& specs,
                                     std::size_t points) {
  geo::LanguageGeoTable table(geo::fibonacci_lattice(points));
  for (const auto& s : specs) table.add(s.code, s.coord);
  return table;
}

void write_language_csv(const fs::path& path, const std::vector<SyntheticLanguageSpec>& specs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# code,lat,lon\n";
  out.precision(17);
  for (const auto& s : specs) {
    out << s.code << ',' << s.coord.latitude_deg() << ',' << s.coord.longitude_deg() << '\n';
  }
}

std::vector<std::size_t> Dataset::indices(std::string_view split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].split == split) out.push_back(i);
  }
  return out;
}

Dataset load_dataset(const std::vector<ManifestEntry>& entries, const fs::path& root,
                     const std::vector<SyntheticLanguageSpec>& specs, std::size_t geo_points) {
  Dataset ds;
  ds.entries = entries;
  ds.geo = language_table(specs, geo_points);
  std::set<std::string> langs;
  for (const auto& e : entries) {
    if (!ds.geo.contains(e.lang)) {
      throw NotFoundError("utterance '" + e.id + "' has unknown language '" + e.lang + "'");
    }
    langs.insert(e.lang);
  }
  // Classes cover every language with a spec, so labels do not depend on which
  // splits happen to be loaded.
  for (const auto& s : specs) langs.insert(s.code);
  ds.languages.assign(langs.begin(), langs.end());
  for (std::size_t i = 0; i < ds.languages.size(); ++i) {
    ds.label_of[ds.languages[i]] = static_cast<int>(i);
  }
  ds.signals.resize(entries.size());
  std::vector<std::string> errors(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < entries.size(); ++i) {
    try {
      ds.signals[i] = load_signal(entries[i], root, specs);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  }
  for (const auto& err : errors) {
    if (!err.empty()) throw IoError("loading signals failed: " + err);
  }
  return ds;
}

}  // namespace geolid::data
