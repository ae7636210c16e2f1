// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "geolid/data/sampler.hpp"
#include "geolid/errors.hpp"
#include "geolid/eval/eval.hpp"
#include "geolid/util/seed.hpp"

namespace geolid::train {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
double value_or_zero(const std::optional<ad::Tensor<T>>& t) {
  return t ? static_cast<double>(t->item()) : 0.0;
}

TrainConfig prepared(TrainConfig cfg, const data::Dataset& ds) {
  cfg.model.head.classes = ds.languages.size();
  cfg.validate();
  if (!ds.entries.empty() && ds.target(0).size() != cfg.model.head.geo_dim) {
    throw ConfigError("dataset geolocation vectors have " + std::to_string(ds.target(0).size()) +
                      " entries, the model expects " + std::to_string(cfg.model.head.geo_dim));
  }
  return cfg;
}

std::string csv_row(const TrainLogRecord& r) {
  std::ostringstream s;
  s.precision(17);  // exact round trip on resume
  s << r.step << ',' << r.lr << ',' << r.loss_class << ',' << r.loss_geo << ','
    << r.loss_geo_inter << ',' << r.loss_total << ',' << r.secs;
  return s.str();
}

TrainLogRecord parse_row(const std::string& line) {
  TrainLogRecord r;
  char c = 0;
  std::istringstream s(line);
  s >> r.step >> c >> r.lr >> c >> r.loss_class >> c >> r.loss_geo >> c >> r.loss_geo_inter >> c >>
      r.loss_total >> c >> r.secs;
  if (!s) throw ParseError("bad training log row '" + line + "'");
  return r;
}

std::vector<float> as_vector(std::span<const float> s) { return {s.begin(), s.end()}; }

}  // namespace

template <class T>
StepLosses train_step(model::LIDModel<T>& m, AdamState<T>& adam,
                      std::span<const model::Batch<T>> micro, double lr, const AdamConfig& cfg) {
  if (micro.empty()) throw std::invalid_argument("train_step: no micro-batches");
  ad::Gradients<T> sum;
  StepLosses out;
  for (const auto& b : micro) {
    if (b.labels.empty()) throw std::invalid_argument("train_step: micro-batch without labels");
    ad::Tape<T> tape;
    auto tr = m.forward(b, &tape, true);
    const double total = static_cast<double>(tr.loss_total->item());
    if (!std::isfinite(total)) {
      throw NumericError("non-finite training loss (" + std::to_string(total) + ")");
    }
    out.loss_total += total;
    out.loss_class += value_or_zero(tr.loss_class);
    out.loss_geo += value_or_zero(tr.loss_geo);
    out.loss_geo_inter += value_or_zero(tr.loss_geo_inter);
    auto g = ad::backward(*tr.loss_total, m.params());
    if (sum.empty()) {
      sum = std::move(g);
      continue;
    }
    for (auto& [name, t] : sum) {
      auto dst = t.mutable_data();
      const auto src = g.at(name).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
  const double n = static_cast<double>(micro.size());
  if (micro.size() > 1) {
    for (auto& [name, t] : sum) {
      for (auto& v : t.mutable_data()) v = T(v / n);
    }
  }
  adam_step(m.params(), sum, adam, lr, cfg);
  out.loss_total /= n;
  out.loss_class /= n;
  out.loss_geo /= n;
  out.loss_geo_inter /= n;
  return out;
}

template StepLosses train_step(model::LIDModel<float>&, AdamState<float>&,
                               std::span<const model::Batch<float>>, double, const AdamConfig&);
template StepLosses train_step(model::LIDModel<double>&, AdamState<double>&,
                               std::span<const model::Batch<double>>, double, const AdamConfig&);

model::Batch<float> make_batch(const data::Dataset& ds, std::span<const std::size_t> rows,
                               const model::ModelConfig& cfg) {
  const std::size_t n = cfg.samples, g = cfg.head.geo_dim;
  model::Batch<float> b;
  b.waves = ad::Tensor<float>({rows.size(), n});
  b.geo = ad::Tensor<float>({rows.size(), g});
  auto w = b.waves.mutable_data();
  auto t = b.geo.mutable_data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& sig = ds.signals.at(rows[r]);
    if (sig.size() < n) {
      throw ConfigError("utterance '" + ds.entries[rows[r]].id + "' has " +
                        std::to_string(sig.size()) + " samples, the model needs " + std::to_string(n));
    }
    std::copy_n(sig.begin(), n, w.begin() + static_cast<std::ptrdiff_t>(r * n));
    const auto& target = ds.target(rows[r]);
    if (target.size() != g) throw ShapeError("geolocation target length mismatch");
    for (std::size_t j = 0; j < g; ++j) t[r * g + j] = static_cast<float>(target[j]);
    b.labels.push_back(ds.label(rows[r]));
  }
  return b;
}

Trainer::Trainer(TrainConfig cfg, const data::Dataset& ds, fs::path out)
    : cfg_(prepared(std::move(cfg), ds)),
      ds_(ds),
      out_(std::move(out)),
      model_(cfg_.model, derive_seed(cfg_.seed, "model")) {}

io::Archive Trainer::snapshot() const {
  io::Archive a;
  a.meta = {{"kind", "checkpoint"},
            {"step", step_},
            {"adam_step", adam_.step},
            {"seed", cfg_.seed},
            {"config", to_config_map(cfg_)},
            {"languages", ds_.languages},
            {"best_step", best_step_}};
  a.meta["best_dev_accuracy"] = best_acc_ ? json(*best_acc_) : json(nullptr);
  for (const auto& [name, p] : model_.params()) {
    a.tensors.push_back({"param/" + name, p.value.shape(), as_vector(p.value.data())});
    auto m = adam_.m.find(name);
    if (m != adam_.m.end()) {
      a.tensors.push_back({"adam_m/" + name, p.value.shape(), m->second});
      a.tensors.push_back({"adam_v/" + name, p.value.shape(), adam_.v.at(name)});
    }
  }
  return a;
}

void Trainer::checkpoint() {
  auto acc = eval::split_accuracy(model_, ds_, data::kDev);
  const bool better = !best_acc_ || (acc && *acc > *best_acc_) || (!acc && !best_acc_);
  if (better) {
    best_acc_ = acc;
    best_step_ = step_;
  }
  const auto snap = snapshot();
  io::write_archive(out_ / kLatestCheckpoint, snap);
  if (better || !fs::exists(out_ / kBestCheckpoint)) io::write_archive(out_ / kBestCheckpoint, snap);
}

void Trainer::resume(const fs::path& checkpoint) {
  const auto a = io::read_archive(checkpoint);
  if (a.meta.value("kind", "") != "checkpoint") throw IoError(checkpoint.string() + " is not a checkpoint");
  const auto saved = a.meta.at("config").get<io::ConfigMap>();
  if (saved != to_config_map(cfg_)) {
    throw ConfigError("checkpoint " + checkpoint.string() + " was written with a different configuration");
  }
  for (auto& [name, p] : model_.params()) {
    const auto& t = a.at("param/" + name);
    model_.params().set_value(name, ad::Tensor<float>(t.shape, t.data));
  }
  adam_ = {};
  adam_.step = a.meta.at("adam_step").get<std::uint64_t>();
  for (const auto& t : a.tensors) {
    if (t.name.rfind("adam_m/", 0) == 0) adam_.m[t.name.substr(7)] = t.data;
    if (t.name.rfind("adam_v/", 0) == 0) adam_.v[t.name.substr(7)] = t.data;
  }
  step_ = a.meta.at("step").get<std::uint64_t>();
  best_step_ = a.meta.at("best_step").get<std::uint64_t>();
  const auto& best = a.meta.at("best_dev_accuracy");
  best_acc_ = best.is_null() ? std::nullopt : std::optional<double>(best.get<double>());

  log_.clear();
  std::ifstream in(out_ / kTrainLog);
  std::string line;
  if (in && std::getline(in, line)) {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto r = parse_row(line);
      if (r.step <= step_) log_.push_back(r);
    }
  }
}

TrainResult Trainer::run(std::uint64_t until) {
  if (until == 0 || until > cfg_.steps) until = cfg_.steps;
  fs::create_directories(out_);

  const auto pool = ds_.indices(data::kTrain);
  if (pool.empty()) throw ConfigError("the manifest has no training utterances");
  std::map<std::string, std::size_t> counts;
  for (auto i : pool) ++counts[ds_.entries[i].lang];
  data::BatchIterator batches(ds_.entries, pool, data::balanced_sampler(counts, cfg_.sampling_beta),
                              cfg_.batch_seconds, derive_seed(cfg_.seed, "batches"));

  {
    std::ofstream log(out_ / kTrainLog, std::ios::trunc);
    log << kLogHeader << '\n';
    for (const auto& r : log_) log << csv_row(r) << '\n';
    if (!log) throw IoError("cannot write " + (out_ / kTrainLog).string());
  }
  std::ofstream log(out_ / kTrainLog, std::ios::app);

  std::vector<model::Batch<float>> micro(cfg_.accumulation);
  while (step_ < until) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t a = 0; a < cfg_.accumulation; ++a) {
      const auto rows = batches.batch(step_ * cfg_.accumulation + a);
      micro[a] = make_batch(ds_, rows, cfg_.model);
    }
    const double lr = tri_stage_lr(step_, cfg_.schedule);
    const auto losses = train_step<float>(model_, adam_, micro, lr, cfg_.adam);
    ++step_;
    TrainLogRecord r{step_, lr, losses.loss_class, losses.loss_geo, losses.loss_geo_inter,
                     losses.loss_total,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
    log_.push_back(r);
    log << csv_row(r) << '\n' << std::flush;
    if (step_ % cfg_.checkpoint_interval == 0 || step_ == cfg_.steps) checkpoint();
  }

  TrainResult out;
  out.steps = step_;
  out.log = log_;
  out.best_dev_accuracy = best_acc_;
  out.best_step = best_step_;
  out.latest = out_ / kLatestCheckpoint;
  out.best = out_ / kBestCheckpoint;
  return out;
}

LoadedModel load_checkpoint_model(const fs::path& path) {
  const auto a = io::read_archive(path);
  if (a.meta.value("kind", "") != "checkpoint") throw IoError(path.string() + " is not a checkpoint");
  TrainConfig cfg;
  apply_config(cfg, a.meta.at("config").get<io::ConfigMap>());
  model::LIDModel<float> m(cfg.model, derive_seed(cfg.seed, "model"));
  for (auto& [name, p] : m.params()) {
    const auto& t = a.at("param/" + name);
    m.params().set_value(name, ad::Tensor<float>(t.shape, t.data));
  }
  return {cfg, a.meta.at("languages").get<std::vector<std::string>>(), std::move(m)};
}

}  // namespace geolid::train
