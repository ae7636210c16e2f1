// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "geolid/data/manifest.hpp"
#include "geolid/io/archive.hpp"
#include "geolid/model/model.hpp"
#include "geolid/train/adam.hpp"
#include "geolid/train/config.hpp"

namespace geolid::train {

inline constexpr const char* kLatestCheckpoint = "latest.ckpt";
inline constexpr const char* kBestCheckpoint = "best.ckpt";
inline constexpr const char* kTrainLog = "train_log.csv";
inline constexpr const char* kLogHeader = "step,lr,loss_class,loss_geo,loss_geo_inter,loss_total,secs";

// Terms a mode does not compute are logged as 0.
struct TrainLogRecord {
  std::uint64_t step = 0;
  double lr = 0;
  double loss_class = 0;
  double loss_geo = 0;
  double loss_geo_inter = 0;
  double loss_total = 0;
  double secs = 0;  // wall time of the step
};

struct StepLosses {
  double loss_class = 0, loss_geo = 0, loss_geo_inter = 0, loss_total = 0;
};

// One optimizer step: gradients of every micro-batch are averaged, then Adam
// applies them at `lr`. Losses are averaged the same way. A non-finite loss
// throws NumericError before any parameter changes.
template <class T>
StepLosses train_step(model::LIDModel<T>& model, AdamState<T>& adam,
                      std::span<const model::Batch<T>> micro, double lr,
                      const AdamConfig& cfg = {});

// Rows of `ds` as a batch: the first `samples` samples of each signal.
model::Batch<float> make_batch(const data::Dataset& ds, std::span<const std::size_t> rows,
                               const model::ModelConfig& cfg);

// Model configuration and weights of a checkpoint.
struct LoadedModel {
  TrainConfig config;
  std::vector<std::string> languages;
  model::LIDModel<float> model;
};
LoadedModel load_checkpoint_model(const std::filesystem::path& path);

struct TrainResult {
  std::uint64_t steps = 0;
  std::vector<TrainLogRecord> log;
  std::optional<double> best_dev_accuracy;
  std::uint64_t best_step = 0;
  std::filesystem::path latest;
  std::filesystem::path best;
};

// The optimization loop. Artifacts go to `out`: the CSV log, latest.ckpt and
// best.ckpt (highest dev accuracy among checkpoints).
class Trainer {
 public:
  // Sets the class count from the dataset and validates the configuration.
  Trainer(TrainConfig cfg, const data::Dataset& ds, std::filesystem::path out);

  // Restores weights, optimizer state and step from a checkpoint written by
  // a run with the same configuration; the log keeps rows up to that step.
  void resume(const std::filesystem::path& checkpoint);

  // Trains up to `until` steps (default: the configured total).
  TrainResult run(std::uint64_t until = 0);

  const TrainConfig& config() const noexcept { return cfg_; }
  model::LIDModel<float>& model() noexcept { return model_; }
  std::uint64_t step() const noexcept { return step_; }

 private:
  io::Archive snapshot() const;
  void checkpoint();

  TrainConfig cfg_;
  const data::Dataset& ds_;
  std::filesystem::path out_;
  model::LIDModel<float> model_;
  AdamState<float> adam_;
  std::uint64_t step_ = 0;
  std::vector<TrainLogRecord> log_;
  std::optional<double> best_acc_;
  std::uint64_t best_step_ = 0;
};

}  // namespace geolid::train
