// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geolid/data/manifest.hpp"
#include "geolid/model/model.hpp"

namespace geolid::eval {

// Predictions and embeddings for a list of dataset rows, in the given order.
struct Inference {
  std::vector<int> predicted;
  std::vector<std::vector<double>> embeddings;
};

// Batched inference (margin-free cosine argmax). Chunks run in parallel;
// each utterance's result does not depend on the chunking.
Inference infer(model::LIDModel<float>& model, const data::Dataset& ds,
                std::span<const std::size_t> rows, std::size_t chunk = 32);

// Percent correct on a split, or nullopt when the split is empty.
std::optional<double> split_accuracy(model::LIDModel<float>& model, const data::Dataset& ds,
                                     std::string_view split);

struct Compactness {
  double score = 0;
  std::size_t used = 0;           // embeddings that entered the centroid
  std::size_t zero_excluded = 0;  // all-zero embeddings left out
};

// Mean Euclidean distance of the L2-normalized embeddings to their centroid.
// Throws std::invalid_argument when fewer than two non-zero embeddings remain.
Compactness compactness(const std::vector<std::vector<double>>& embeddings);

struct SplitResult {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0;  // percent
  std::map<std::string, double> language_accuracy;  // languages present in the split
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::map<std::string, Compactness> compactness;   // languages with two or more embeddings
};

struct EvalReport {
  std::vector<std::string> languages;     // class index -> code
  std::map<std::string, SplitResult> splits;  // requested splits that have utterances
  std::vector<std::string> absent;        // requested splits without utterances
  std::optional<double> macro_average;    // unweighted mean over present splits
};

// Evaluates the requested splits. Rows are visited in id order, so the report
// does not depend on the manifest order. With `dump`, embeddings and labels are
// written as an archive with tensors emb/<split> and label/<split>.
EvalReport evaluate(model::LIDModel<float>& model, const data::Dataset& ds,
                    const std::vector<std::string>& splits,
                    const std::optional<std::filesystem::path>& dump = std::nullopt);

std::string report_markdown(const EvalReport& report);
std::string report_csv(const EvalReport& report);

// Mean compactness over the given languages on one split; nullopt when none
// of them has a score.
std::optional<double> mean_compactness(const EvalReport& report, std::string_view split,
                                       const std::vector<std::string>& languages);

}  // namespace geolid::eval
