// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "geolid/data/manifest.hpp"
#include "geolid/errors.hpp"
#include "geolid/eval/ablation.hpp"
#include "geolid/eval/eval.hpp"
#include "geolid/geovec.hpp"
#include "geolid/io/archive.hpp"
#include "geolid/kernels/kernels.hpp"
#include "geolid/model/check.hpp"
#include "geolid/train/trainer.hpp"
#include "json.hpp"

#ifndef GEOLID_VERSION
#define GEOLID_VERSION "0.0.0"
#endif

namespace geolid::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kGradcheckTolerance = 1e-4;

// Flags shared by the commands that build a training configuration. Each one
// maps onto a config key and only overrides when given.
struct ConfigFlags {
  std::string config;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;  // config key -> flag text
  bool no_detach = false;
  std::vector<std::pair<CLI::Option*, std::string>> options;

  void add(CLI::App& app, const train::TrainConfig& defaults) {
    const auto d = train::to_config_map(defaults);
    app.add_option("--config", config, "preset name (desk, tiny) or key = value config file")
        ->default_str("desk");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
      auto* opt = app.add_option(name, values[key], help)->default_str(d.at(key));
      options.emplace_back(opt, key);
    };
    flag("--seed", "seed", "root random seed");
    flag("--steps", "steps", "optimizer steps (stages rescale unless set explicitly)");
    flag("--mode", "mode", "baseline, geo-pred or geo-cond");
    flag("--layers", "layers", "conditioned layers: full, bottom, middle, top, none or a list");
    flag("--cond-share", "cond_share", "shared or independent CondProj");
    flag("--cond-freeze", "cond_freeze", "frozen or trainable CondProj");
    flag("--lambda", "lambda", "weight of the geolocation losses");
    flag("--gamma", "gamma", "share of the intermediate geolocation losses");
    app.add_flag("--no-detach", no_detach, "let gradients flow into the conditioning path");
    std::string keys;
    for (const auto& k : train::config_keys()) keys += std::string(k.key) + " ";
    app.add_option("--set", sets, "extra override KEY=VALUE; keys: " + keys)->default_str("");
  }

  io::ConfigMap merged() const {
    io::ConfigMap m;
    if (!config.empty()) {
      if (config == "desk" || config == "tiny") {
        m["preset"] = config;
      } else {
        m = io::read_config_file(config);
      }
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects KEY=VALUE, got '" + s + "'");
      m[s.substr(0, eq)] = s.substr(eq + 1);
    }
    for (const auto& [opt, key] : options) {
      if (opt->count() > 0) m[key] = values.at(key);
    }
    if (no_detach) m["detach"] = "false";
    return m;
  }

  train::TrainConfig resolve() const {
    train::TrainConfig cfg;
    train::apply_config(cfg, merged());
    return cfg;
  }
};

fs::path default_out() {
  if (const char* env = std::getenv("GEOLID_OUT"); env != nullptr && *env != '\0') return env;
  return "geolid_out";
}

// Languages of a generated corpus: the built-in synthesis specs, with the
// coordinates (and membership) taken from languages.csv when present.
std::vector<data::SyntheticLanguageSpec> corpus_languages(const fs::path& dir) {
  auto specs = data::default_languages();
  if (!fs::exists(dir / "languages.csv")) return specs;
  const auto table = geo::load_language_geolocations(dir / "languages.csv", geo::fibonacci_lattice(1));
  std::vector<data::SyntheticLanguageSpec> out;
  for (const auto& [code, lg] : table) {
    auto it = std::find_if(specs.begin(), specs.end(), [&](const auto& s) { return s.code == code; });
    data::SyntheticLanguageSpec s = it != specs.end() ? *it : data::SyntheticLanguageSpec{};
    if (it == specs.end()) {
      s.code = code;
      s.formants = {500, 1500, 2500};
    }
    s.coord = lg.coord;
    out.push_back(std::move(s));
  }
  return out;
}

data::Dataset load_corpus(const fs::path& dir, std::size_t geo_points) {
  const auto entries = data::read_manifest(dir / "manifest.jsonl");
  if (entries.empty()) throw ConfigError("manifest " + (dir / "manifest.jsonl").string() + " is empty");
  return data::load_dataset(entries, dir, corpus_languages(dir), geo_points);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

// run.meta: the command, its effective configuration and seed, and CRC32s of
// the artifacts it wrote. Wall-time logs are listed separately because they
// differ between otherwise identical runs.
void write_run_meta(const fs::path& out, const std::string& command, std::uint64_t seed,
                    const io::ConfigMap& config, const std::vector<fs::path>& artifacts,
                    const std::vector<fs::path>& logs = {}) {
  json meta = {{"command", command}, {"version", GEOLID_VERSION}, {"seed", seed}, {"config", config}};
  meta["artifacts"] = json::object();
  for (const auto& a : artifacts) {
    if (fs::is_directory(out / a)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(out / a)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      std::uint32_t crc = 0;
      for (const auto& f : files) {
        const auto rel = fs::relative(f, out).generic_string();
        crc = io::crc32_of(rel.data(), rel.size(), crc);
        const auto c = io::file_crc32(f);
        crc = io::crc32_of(&c, sizeof c, crc);
      }
      meta["artifacts"][a.generic_string() + "/"] = io::hex32(crc);
    } else {
      meta["artifacts"][a.generic_string()] = io::hex32(io::file_crc32(out / a));
    }
  }
  meta["logs"] = json::array();
  for (const auto& l : logs) meta["logs"].push_back(l.generic_string());
  write_text(out / "run.meta", meta.dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"geolid: geolocation-conditioned spoken language identification"};
  app.name("geolid");
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();

  fs::path out_dir = default_out();
  int threads = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory (default from GEOLID_OUT)")
        ->default_str(default_out().string());
    sub->add_option("--threads", threads, "worker threads; 1 is fully serial, 0 uses all cores")
        ->default_str("0")
        ->check(CLI::NonNegativeNumber);
  };

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "synthesize the corpus, manifest and language table");
  common(gen);
  data::CorpusOptions corpus;
  gen->add_option("--seed", corpus.seed, "root random seed");
  gen->add_option("--train", corpus.counts.train, "train utterances per language");
  gen->add_option("--dev", corpus.counts.dev, "dev utterances per language");
  gen->add_option("--dialect-dev", corpus.counts.dialect_dev, "dialect-dev utterances per extra dialect");
  gen->add_option("--seconds", corpus.seconds, "utterance length in seconds");

  // train
  auto* trn = app.add_subcommand("train", "train a model on a generated corpus");
  common(trn);
  ConfigFlags train_flags;
  train_flags.add(*trn, train::TrainConfig{});
  fs::path data_dir;
  std::string resume;
  trn->add_option("--data", data_dir, "corpus directory from gen-data")->required();
  trn->add_option("--resume", resume, "checkpoint to continue from");

  // eval
  auto* evl = app.add_subcommand("eval", "evaluate a checkpoint");
  common(evl);
  fs::path checkpoint;
  std::string splits = "dev,dialect-dev";
  bool dump = false;
  evl->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  evl->add_option("--data", data_dir, "corpus directory from gen-data")->required();
  evl->add_option("--splits", splits, "comma separated splits");
  evl->add_flag("--dump", dump, "write embeddings.bin with emb/<split> and label/<split>");

  // ablate
  auto* abl = app.add_subcommand("ablate", "train the conditioning design grid");
  common(abl);
  ConfigFlags ablate_flags;
  ablate_flags.add(*abl, train::TrainConfig{});
  std::string grid = "full";
  abl->add_option("--data", data_dir, "corpus directory from gen-data")->required();
  abl->add_option("--grid", grid, "full, or a list of full, bottom, middle, top");

  // geovec
  auto* gv = app.add_subcommand("geovec", "print the geolocation vector of a coordinate");
  double lat = 0, lon = 0;
  std::size_t points = 64;
  gv->add_option("--lat", lat, "latitude in degrees")->required();
  gv->add_option("--lon", lon, "longitude in degrees")->required();
  gv->add_option("--points", points, "reference lattice points")->check(CLI::PositiveNumber);

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the full model loss");
  std::string gc_config = "tiny";
  std::uint64_t gc_seed = 0;
  std::string gc_mode = "geo-cond", gc_layers = "full";
  gc->add_option("--config", gc_config, "preset name or config file");
  gc->add_option("--seed", gc_seed, "model and batch seed");
  gc->add_option("--mode", gc_mode, "baseline, geo-pred or geo-cond");
  gc->add_option("--layers", gc_layers, "conditioned layers");

  app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\nrun with --help for usage\n";
    return 1;
  }

  try {
    if (threads > 0) kernels::set_num_threads(threads);

    if (*gen) {
      fs::create_directories(out_dir);
      const auto entries = data::gen_corpus(data::default_languages(), corpus, out_dir);
      write_run_meta(out_dir, "gen-data", corpus.seed,
                     {{"train", std::to_string(corpus.counts.train)},
                      {"dev", std::to_string(corpus.counts.dev)},
                      {"dialect_dev", std::to_string(corpus.counts.dialect_dev)},
                      {"seconds", std::to_string(corpus.seconds)}},
                     {"manifest.jsonl", "languages.csv", "signals"});
      out << "wrote " << entries.size() << " utterances to " << out_dir.string() << '\n';
      return 0;
    }

    if (*trn) {
      const auto cfg = train_flags.resolve();
      const auto ds = load_corpus(data_dir, cfg.model.head.geo_dim);
      train::Trainer trainer(cfg, ds, out_dir);
      if (!resume.empty()) trainer.resume(resume);
      const auto res = trainer.run();
      const auto effective = train::to_config_map(trainer.config());
      write_text(out_dir / "config.txt", io::format_config(effective));
      write_run_meta(out_dir, "train", cfg.seed, effective,
                     {"config.txt", train::kLatestCheckpoint, train::kBestCheckpoint},
                     {train::kTrainLog});
      out << "trained " << res.steps << " steps, final loss " << res.log.back().loss_total;
      if (res.best_dev_accuracy) out << ", best dev accuracy " << *res.best_dev_accuracy << "% at step " << res.best_step;
      out << '\n';
      return 0;
    }

    if (*evl) {
      auto loaded = train::load_checkpoint_model(checkpoint);
      const auto ds = load_corpus(data_dir, loaded.config.model.head.geo_dim);
      if (ds.languages != loaded.languages) {
        throw ConfigError("the corpus languages differ from the checkpoint's");
      }
      fs::create_directories(out_dir);
      std::optional<fs::path> dump_path;
      if (dump) dump_path = out_dir / "embeddings.bin";
      const auto report = eval::evaluate(loaded.model, ds, split_list(splits), dump_path);
      const auto md = eval::report_markdown(report);
      write_text(out_dir / "report.md", md);
      write_text(out_dir / "report.csv", eval::report_csv(report));
      std::vector<fs::path> artifacts{"report.md", "report.csv"};
      if (dump) artifacts.emplace_back("embeddings.bin");
      auto cfg = train::to_config_map(loaded.config);
      cfg["checkpoint_crc32"] = io::hex32(io::file_crc32(checkpoint));
      write_run_meta(out_dir, "eval", loaded.config.seed, cfg, artifacts);
      out << md;
      return 0;
    }

    if (*abl) {
      const auto cfg = ablate_flags.resolve();
      const auto ds = load_corpus(data_dir, cfg.model.head.geo_dim);
      fs::create_directories(out_dir);
      const auto table = eval::ablation_grid(cfg, ds, eval::grid_strategies(grid), out_dir / "cells",
                                             [&](const eval::AblationRow& row) {
                                               err << row.name << ": " << (row.error.empty() ? "done" : "failed: " + row.error) << '\n';
                                             });
      const auto md = eval::ablation_markdown(table);
      write_text(out_dir / "ablation.md", md);
      write_text(out_dir / "ablation.csv", eval::ablation_csv(table));
      auto meta_cfg = train::to_config_map(cfg);
      meta_cfg["grid"] = grid;
      write_run_meta(out_dir, "ablate", cfg.seed, meta_cfg, {"ablation.md", "ablation.csv"});
      out << md;
      return 0;
    }

    if (*gv) {
      const auto v = geo::geo_vector(geo::GeoCoordinate(lat, lon), geo::fibonacci_lattice(points));
      out.precision(17);
      for (double x : v.values) out << x << '\n';
      return 0;
    }

    if (*gc) {
      train::TrainConfig cfg;
      io::ConfigMap m;
      if (gc_config == "desk" || gc_config == "tiny") {
        m["preset"] = gc_config;
      } else {
        m = io::read_config_file(gc_config);
      }
      m["mode"] = gc_mode;
      m["layers"] = gc_layers;
      train::apply_config(cfg, m);
      cfg.model.validate();
      const auto r = model::gradcheck_model(cfg.model, gc_seed);
      out << "checked " << r.checked << " entries (" << r.skipped_kinks
          << " skipped at non-smooth points), max relative error " << r.max_rel_error << " ("
          << r.worst_param << "[" << r.worst_index << "])\n";
      if (r.max_rel_error > kGradcheckTolerance) {
        err << "error: gradient check failed, tolerance " << kGradcheckTolerance << '\n';
        return 2;
      }
      return 0;
    }

    out << "geolid " << GEOLID_VERSION << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace geolid::cli
