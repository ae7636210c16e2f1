// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geolid/eval/eval.hpp"
#include "geolid/train/config.hpp"

namespace geolid::eval {

struct AblationRow {
  std::string name;
  train::TrainConfig config;
  std::optional<EvalReport> report;
  std::string error;  // set when the cell failed
};

struct AblationTable {
  std::vector<std::string> splits;  // table columns before the macro average
  std::vector<AblationRow> rows;
};

// "full" expands to the four layer strategies full, bottom, middle and top;
// otherwise a comma separated subset of them.
std::vector<std::string> grid_strategies(std::string_view grid);

// Baseline and geo-pred rows, then strategies x {shared, independent} x
// {frozen, trainable}. Every cell trains from `base` (same seed, same data)
// under out/<row name>. A failing cell is recorded and the grid continues.
AblationTable ablation_grid(const train::TrainConfig& base, const data::Dataset& ds,
                            const std::vector<std::string>& strategies,
                            const std::filesystem::path& out,
                            const std::function<void(const AblationRow&)>& on_row = {});

// Markdown table with the best value of each column in bold.
std::string ablation_markdown(const AblationTable& table);
std::string ablation_csv(const AblationTable& table);

}  // namespace geolid::eval
