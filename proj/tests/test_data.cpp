// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include "doctest.h"
#include "geolid/data/manifest.hpp"
#include "geolid/data/sampler.hpp"
#include "geolid/data/synth.hpp"
#include "geolid/errors.hpp"

using namespace geolid;
using namespace geolid::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geolid_test_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Bin with the largest DFT magnitude, skipping DC.
std::size_t peak_bin(const std::vector<float>& x) {
  const std::size_t n = x.size();
  std::size_t best = 1;
  double best_mag = -1;
  for (std::size_t k = 1; k < n / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += static_cast<double>(x[t]) *
             std::polar(1.0, -2 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n));
    }
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("utterance synthesis") {
  const auto langs = default_languages();
  const auto& eng = langs.front();

  SUBCASE("deterministic per seed") {
    CHECK(synth_utterance(eng, "default", 0.5, 7) == synth_utterance(eng, "default", 0.5, 7));
    CHECK(synth_utterance(eng, "default", 0.5, 7) != synth_utterance(eng, "default", 0.5, 8));
    CHECK(synth_utterance(eng, "d1", 1.0, 7).size() == 8000);
  }
  SUBCASE("a single clean formant peaks at its frequency") {
    SyntheticLanguageSpec s;
    s.code = "one";
    s.formants = {1230, 2000, 3000};
    s.amplitudes = {1, 0, 0};
    s.noise = 0;
    s.formant_jitter = 0;
    const auto x = synth_utterance(s, "default", 0.5, 3);
    const double resolution = kSampleRate / static_cast<double>(x.size());
    CHECK(std::abs(static_cast<double>(peak_bin(x)) * resolution - 1230.0) <= resolution);
  }
  SUBCASE("unit shift factors reproduce the base dialect") {
    auto s = eng;
    s.dialects.push_back({"same", {1.0, 1.0, 1.0}, 0.0});
    CHECK(synth_utterance(s, "same", 0.5, 11) == synth_utterance(s, "default", 0.5, 11));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synth_utterance(eng, "nope", 0.5, 1), NotFoundError);
    CHECK_THROWS_AS(synth_utterance(eng, "default", 0.4, 1), std::invalid_argument);
    CHECK_THROWS_AS(synth_utterance(eng, "default", 10.5, 1), std::invalid_argument);
    auto bad = eng;
    bad.formants[2] = 4100;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
  SUBCASE("default language set") {
    CHECK(langs.size() == 12);
    std::size_t with_dialects = 0;
    for (const auto& l : langs) {
      CHECK_NOTHROW(l.validate());
      if (l.dialects.size() == 3) ++with_dialects;
    }
    CHECK(with_dialects == 4);
  }
}

TEST_CASE("corpus planning and generation") {
  const auto langs = default_languages();
  CorpusOptions opt;
  opt.counts = {50, 20, 20};
  opt.seed = 5;

  const auto plan = plan_corpus(langs, opt);
  std::size_t train = 0, dev = 0, ddev = 0;
  std::set<std::string> train_langs, ids;
  for (const auto& e : plan) {
    CHECK(ids.insert(e.id).second);
    if (e.split == kTrain) {
      ++train;
      train_langs.insert(e.lang);
      CHECK(e.dialect == "default");
    }
    if (e.split == kDev) ++dev;
    if (e.split == kDialectDev) {
      ++ddev;
      CHECK(e.dialect != "default");
    }
  }
  CHECK(train == 600);
  CHECK(dev == 240);
  CHECK(ddev == 4 * 2 * 20);
  for (const auto& e : plan) {
    if (e.split == kDialectDev) CHECK(train_langs.count(e.lang) == 1);
  }
  CHECK(plan_corpus(langs, opt) == plan);

  SUBCASE("invalid corpora") {
    auto twins = langs;
    twins[1].coord = twins[0].coord;
    CHECK_THROWS_AS(plan_corpus(twins, opt), ConfigError);
    CHECK_THROWS_AS(plan_corpus({langs[0]}, opt), ConfigError);
  }

  SUBCASE("files on disk") {
    CorpusOptions small = opt;
    small.counts = {3, 2, 1};
    const auto dir = scratch("gen");
    const auto entries = gen_corpus(langs, small, dir);
    const auto again = read_manifest(dir / "manifest.jsonl");
    CHECK(again == entries);
    for (const auto& e : entries) {
      REQUIRE(e.path);
      CHECK(!e.seed);
      const auto x = read_signal(dir / *e.path);
      CHECK(x.size() == 4000);
      // Same samples as direct synthesis from the planned seed.
      const auto planned = std::find_if(plan.begin(), plan.end(), [&](auto& p) { return p.id == e.id; });
      const auto spec = std::find_if(langs.begin(), langs.end(), [&](auto& l) { return l.code == e.lang; });
      REQUIRE(planned != plan.end());
      CHECK(x == synth_utterance(*spec, e.dialect, e.seconds, *planned->seed));
    }
    const auto dir2 = scratch("gen2");
    gen_corpus(langs, small, dir2);
    std::ifstream a(dir / "manifest.jsonl"), b(dir2 / "manifest.jsonl");
    CHECK(std::string(std::istreambuf_iterator<char>(a), {}) ==
          std::string(std::istreambuf_iterator<char>(b), {}));
    const auto table = geo::load_language_geolocations(dir / "languages.csv", geo::fibonacci_lattice(16));
    CHECK(table.size() == 12);
  }
}

TEST_CASE("manifest records") {
  const auto dir = scratch("manifest");
  ManifestEntry e{"eng-train-0000", "eng", "default", "train", 0.5, 42u, std::nullopt};
  write_manifest(dir / "m.jsonl", {e});
  CHECK(read_manifest(dir / "m.jsonl").front() == e);

  auto write = [&](const std::string& text) {
    std::ofstream(dir / "bad.jsonl") << text;
    return dir / "bad.jsonl";
  };
  CHECK_THROWS_AS(read_manifest(write("{\"id\":\"a\"}\n")), ParseError);
  CHECK_THROWS_AS(read_manifest(write(R"({"id":"a","lang":"x","dialect":"default","split":"test","seconds":1,"seed":1})")),
                  ParseError);
  CHECK_THROWS_AS(read_manifest(write(R"({"id":"a","lang":"x","dialect":"default","split":"dev","seconds":1})")),
                  ParseError);
  CHECK_THROWS_AS(read_manifest(write(R"({"id":"a","lang":"x","dialect":"default","split":"dev","seconds":1,"seed":1,"extra":0})")),
                  ParseError);
  CHECK_THROWS_AS(read_manifest(dir / "missing.jsonl"), IoError);
}

TEST_CASE("dataset targets are language-level") {
  const auto langs = default_languages();
  CorpusOptions opt;
  opt.counts = {2, 1, 2};
  const auto entries = plan_corpus(langs, opt);
  const auto ds = load_dataset(entries, {}, langs, 32);
  CHECK(ds.languages.size() == 12);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.target(i) == ds.geo.at(ds.entries[i].lang).vector.values);
    CHECK(ds.languages[static_cast<std::size_t>(ds.label(i))] == ds.entries[i].lang);
  }
}

TEST_CASE("balanced sampling") {
  auto plan = balanced_sampler({{"a", 4}, {"b", 1}}, 0.5);
  CHECK(plan.probabilities[0] == 2.0 / 3.0);
  CHECK(plan.probabilities[1] == 1.0 / 3.0);

  plan = balanced_sampler({{"a", 6}, {"b", 3}, {"c", 1}}, 1.0);
  CHECK(plan.probabilities[0] == doctest::Approx(0.6));
  CHECK(plan.probabilities[2] == doctest::Approx(0.1));
  plan = balanced_sampler({{"a", 6}, {"b", 3}, {"c", 1}}, 0.0);
  for (double p : plan.probabilities) CHECK(p == doctest::Approx(1.0 / 3));

  CHECK_THROWS_AS(balanced_sampler({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(balanced_sampler({{"a", 1}}, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(balanced_sampler({{"a", 0}}, 0.5), std::invalid_argument);
}

TEST_CASE("batch iterator") {
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 40; ++i) {
    entries.push_back({"u" + std::to_string(i), i < 30 ? "a" : "b", "default", "train", 3.0, 1u, std::nullopt});
  }
  std::vector<std::size_t> pool(entries.size());
  std::iota(pool.begin(), pool.end(), 0);
  const auto plan = balanced_sampler({{"a", 30}, {"b", 10}}, 0.5);

  BatchIterator it(entries, pool, plan, 180.0, 9);
  CHECK(it.next().size() == 60);

  BatchIterator a(entries, pool, plan, 30.0, 9), b(entries, pool, plan, 30.0, 9);
  for (int k = 0; k < 20; ++k) CHECK(a.next() == b.next());
  b.seek(3);
  CHECK(b.next() == a.batch(3));

  // Empirical language frequencies over 10,000 draws.
  BatchIterator one(entries, pool, plan, 3.0, 10);
  double from_a = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto batch = one.next();
    REQUIRE(batch.size() == 1);
    if (entries[batch[0]].lang == "a") ++from_a;
  }
  CHECK(std::abs(from_a / 10000 - plan.probabilities[0]) <= 0.02);

  std::vector<std::size_t> only_a(pool.begin(), pool.begin() + 30);
  CHECK_THROWS_AS(BatchIterator(entries, only_a, plan, 3.0, 1), ConfigError);
}
