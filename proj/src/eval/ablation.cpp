// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/eval/ablation.hpp"

#include <algorithm>
#include <sstream>

#include "geolid/errors.hpp"
#include "geolid/train/trainer.hpp"

namespace geolid::eval {

namespace {

const std::vector<std::string> kStrategies{"full", "bottom", "middle", "top"};

std::string fixed(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

// Column values of a row: one per split, then the macro average.
std::vector<std::optional<double>> values(const AblationTable& t, const AblationRow& row) {
  std::vector<std::optional<double>> out;
  for (const auto& s : t.splits) {
    if (row.report && row.report->splits.count(s)) {
      out.push_back(row.report->splits.at(s).accuracy);
    } else {
      out.push_back(std::nullopt);
    }
  }
  out.push_back(row.report ? row.report->macro_average : std::nullopt);
  return out;
}

}  // namespace

std::vector<std::string> grid_strategies(std::string_view grid) {
  if (grid == "full") return kStrategies;
  std::vector<std::string> out;
  std::stringstream ss{std::string(grid)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (std::find(kStrategies.begin(), kStrategies.end(), item) == kStrategies.end()) {
      throw ConfigError("unknown grid strategy '" + item + "'");
    }
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty ablation grid");
  return out;
}

AblationTable ablation_grid(const train::TrainConfig& base, const data::Dataset& ds,
                            const std::vector<std::string>& strategies,
                            const std::filesystem::path& out,
                            const std::function<void(const AblationRow&)>& on_row) {
  AblationTable table;
  table.splits = {std::string(data::kDev), std::string(data::kDialectDev)};

  std::vector<std::pair<std::string, io::ConfigMap>> cells{
      {"baseline", {{"mode", "baseline"}, {"layers", "none"}, {"detach", "true"}}},
      {"geo-pred", {{"mode", "geo-pred"}, {"layers", "none"}}},
  };
  for (const auto& s : strategies) {
    for (const char* share : {"shared", "independent"}) {
      for (const char* freeze : {"frozen", "trainable"}) {
        cells.push_back({s + "-" + share + "-" + freeze,
                         {{"mode", "geo-cond"}, {"layers", s}, {"cond_share", share}, {"cond_freeze", freeze}}});
      }
    }
  }

  for (const auto& [name, overrides] : cells) {
    AblationRow row;
    row.name = name;
    row.config = base;
    try {
      train::apply_config(row.config, overrides);
      train::Trainer trainer(row.config, ds, out / name);
      trainer.run();
      row.config = trainer.config();
      row.report = evaluate(trainer.model(), ds, table.splits);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (on_row) on_row(row);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string ablation_markdown(const AblationTable& t) {
  const std::size_t cols = t.splits.size() + 1;
  std::vector<std::optional<double>> best(cols);
  for (const auto& row : t.rows) {
    const auto v = values(t, row);
    for (std::size_t c = 0; c < cols; ++c) {
      if (v[c] && (!best[c] || *v[c] > *best[c])) best[c] = v[c];
    }
  }
  std::ostringstream s;
  s << "| # | configuration |";
  for (const auto& split : t.splits) s << ' ' << split << " |";
  s << " macro avg |\n|---:|---|";
  for (std::size_t c = 0; c < cols; ++c) s << "---:|";
  s << '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    s << "| " << r + 1 << " | " << row.name << " |";
    if (!row.error.empty()) {
      for (std::size_t c = 0; c < cols; ++c) s << " failed |";
      s << '\n';
      continue;
    }
    const auto v = values(t, row);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[c]) {
        s << " - |";
      } else if (*v[c] == *best[c]) {
        s << " **" << fixed(*v[c]) << "** |";
      } else {
        s << ' ' << fixed(*v[c]) << " |";
      }
    }
    s << '\n';
  }
  return s.str();
}

std::string ablation_csv(const AblationTable& t) {
  std::ostringstream s;
  s.precision(9);
  s << "row,name,mode,layers,cond_share,cond_freeze";
  for (const auto& split : t.splits) s << ',' << split;
  s << ",macro,error\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto cfg = train::to_config_map(row.config);
    s << r + 1 << ',' << row.name << ',' << cfg.at("mode") << ",\"" << cfg.at("layers") << "\","
      << cfg.at("cond_share") << ',' << cfg.at("cond_freeze");
    for (const auto& v : values(t, row)) {
      s << ',';
      if (v) s << *v;
    }
    std::string err = row.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    s << ",\"" << err << "\"\n";
  }
  return s.str();
}

}  // namespace geolid::eval
