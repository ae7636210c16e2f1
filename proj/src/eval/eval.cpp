// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "geolid/io/archive.hpp"
#include "geolid/train/trainer.hpp"

namespace geolid::eval {

Inference infer(model::LIDModel<float>& m, const data::Dataset& ds,
                std::span<const std::size_t> rows, std::size_t chunk) {
  if (chunk == 0) chunk = 1;
  Inference out;
  out.predicted.resize(rows.size());
  out.embeddings.resize(rows.size());
  const std::size_t chunks = (rows.size() + chunk - 1) / chunk;
  std::vector<std::string> errors(chunks);
  // Inference reads the weights only.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < chunks; ++c) {
    try {
      const std::size_t lo = c * chunk, hi = std::min(rows.size(), lo + chunk);
      auto batch = train::make_batch(ds, rows.subspan(lo, hi - lo), m.config());
      batch.labels.clear();
      const auto tr = m.forward(batch, nullptr, false);
      const auto pred = model::argmax_rows(tr.cosines);
      const std::size_t e = tr.embedding.shape()[1];
      const auto emb = tr.embedding.data();
      for (std::size_t i = lo; i < hi; ++i) {
        out.predicted[i] = pred[i - lo];
        const auto row = emb.subspan((i - lo) * e, e);
        out.embeddings[i].assign(row.begin(), row.end());
      }
    } catch (const std::exception& ex) {
      errors[c] = ex.what();
    }
  }
  for (const auto& err : errors) {
    if (!err.empty()) throw std::runtime_error("inference failed: " + err);
  }
  return out;
}

std::optional<double> split_accuracy(model::LIDModel<float>& m, const data::Dataset& ds,
                                     std::string_view split) {
  const auto rows = ds.indices(split);
  if (rows.empty()) return std::nullopt;
  const auto inf = infer(m, ds, rows);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) correct += inf.predicted[i] == ds.label(rows[i]);
  return 100.0 * static_cast<double>(correct) / static_cast<double>(rows.size());
}

Compactness compactness(const std::vector<std::vector<double>>& embeddings) {
  Compactness out;
  std::vector<std::vector<double>> unit;
  for (const auto& e : embeddings) {
    double norm = 0;
    for (double v : e) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0) {
      ++out.zero_excluded;
      continue;
    }
    auto& u = unit.emplace_back(e);
    for (double& v : u) v /= norm;
  }
  out.used = unit.size();
  if (unit.size() < 2) {
    throw std::invalid_argument("compactness needs at least two non-zero embeddings, got " +
                                std::to_string(unit.size()) + " (" +
                                std::to_string(out.zero_excluded) + " zero vectors excluded)");
  }
  const std::size_t dim = unit.front().size();
  std::vector<double> centroid(dim, 0.0);
  for (const auto& u : unit) {
    if (u.size() != dim) throw std::invalid_argument("compactness: embeddings differ in length");
    for (std::size_t j = 0; j < dim; ++j) centroid[j] += u[j];
  }
  for (double& c : centroid) c /= static_cast<double>(unit.size());
  double total = 0;
  for (const auto& u : unit) {
    double d2 = 0;
    for (std::size_t j = 0; j < dim; ++j) d2 += (u[j] - centroid[j]) * (u[j] - centroid[j]);
    total += std::sqrt(d2);
  }
  out.score = total / static_cast<double>(unit.size());
  return out;
}

EvalReport evaluate(model::LIDModel<float>& m, const data::Dataset& ds,
                    const std::vector<std::string>& splits,
                    const std::optional<std::filesystem::path>& dump) {
  EvalReport report;
  report.languages = ds.languages;
  const std::size_t L = ds.languages.size();
  io::Archive archive;
  archive.meta = {{"kind", "embeddings"}, {"languages", ds.languages}};
  double macro = 0;
  for (const auto& split : splits) {
    auto rows = ds.indices(split);
    if (rows.empty()) {
      report.absent.push_back(split);
      continue;
    }
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return ds.entries[a].id < ds.entries[b].id; });
    const auto inf = infer(m, ds, rows);

    SplitResult r;
    r.total = rows.size();
    r.confusion.assign(L, std::vector<std::size_t>(L, 0));
    std::map<std::string, std::vector<std::vector<double>>> by_lang;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int y = ds.label(rows[i]);
      ++r.confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(inf.predicted[i])];
      r.correct += inf.predicted[i] == y;
      by_lang[ds.entries[rows[i]].lang].push_back(inf.embeddings[i]);
    }
    r.accuracy = 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.total);
    for (std::size_t l = 0; l < L; ++l) {
      std::size_t n = 0;
      for (auto c : r.confusion[l]) n += c;
      if (n > 0) {
        r.language_accuracy[ds.languages[l]] =
            100.0 * static_cast<double>(r.confusion[l][l]) / static_cast<double>(n);
      }
    }
    for (const auto& [lang, embs] : by_lang) {
      try {
        r.compactness[lang] = compactness(embs);
      } catch (const std::invalid_argument&) {
        // Fewer than two usable embeddings: no score for this language.
      }
    }
    macro += r.accuracy;

    if (dump) {
      const std::size_t e = inf.embeddings.front().size();
      io::NamedTensor emb{"emb/" + split, {rows.size(), e}, {}};
      io::NamedTensor lab{"label/" + split, {rows.size()}, {}};
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (double v : inf.embeddings[i]) emb.data.push_back(static_cast<float>(v));
        lab.data.push_back(static_cast<float>(ds.label(rows[i])));
        ids.push_back(ds.entries[rows[i]].id);
      }
      archive.tensors.push_back(std::move(emb));
      archive.tensors.push_back(std::move(lab));
      archive.meta["ids"][split] = ids;
    }
    report.splits.emplace(split, std::move(r));
  }
  if (!report.splits.empty()) macro /= static_cast<double>(report.splits.size());
  if (!report.splits.empty()) report.macro_average = macro;
  if (dump) io::write_archive(*dump, archive);
  return report;
}

namespace {

std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

std::string report_markdown(const EvalReport& report) {
  std::ostringstream s;
  s << "| split | utterances | accuracy (%) |\n|---|---:|---:|\n";
  for (const auto& [split, r] : report.splits) {
    s << "| " << split << " | " << r.total << " | " << fixed(r.accuracy) << " |\n";
  }
  for (const auto& split : report.absent) s << "| " << split << " | 0 | absent |\n";
  if (report.macro_average) s << "| macro avg | | " << fixed(*report.macro_average) << " |\n";
  for (const auto& [split, r] : report.splits) {
    s << "\n### " << split << "\n\n| language | accuracy (%) | compactness |\n|---|---:|---:|\n";
    for (const auto& [lang, acc] : r.language_accuracy) {
      auto c = r.compactness.find(lang);
      s << "| " << lang << " | " << fixed(acc) << " | "
        << (c == r.compactness.end() ? std::string("-") : fixed(c->second.score, 4)) << " |\n";
    }
  }
  return s.str();
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream s;
  s.precision(9);
  s << "split,language,total,correct,accuracy,compactness\n";
  for (const auto& [split, r] : report.splits) {
    s << split << ",all," << r.total << ',' << r.correct << ',' << r.accuracy << ",\n";
    for (const auto& [lang, acc] : r.language_accuracy) {
      const auto l = static_cast<std::size_t>(
          std::find(report.languages.begin(), report.languages.end(), lang) - report.languages.begin());
      std::size_t total = 0;
      for (auto c : r.confusion[l]) total += c;
      s << split << ',' << lang << ',' << total << ',' << r.confusion[l][l] << ',' << acc << ',';
      if (auto c = r.compactness.find(lang); c != r.compactness.end()) s << c->second.score;
      s << '\n';
    }
  }
  if (report.macro_average) s << "macro,all,,," << *report.macro_average << ",\n";
  return s.str();
}

std::optional<double> mean_compactness(const EvalReport& report, std::string_view split,
                                       const std::vector<std::string>& languages) {
  auto it = report.splits.find(std::string(split));
  if (it == report.splits.end()) return std::nullopt;
  double sum = 0;
  std::size_t n = 0;
  for (const auto& lang : languages) {
    auto c = it->second.compactness.find(lang);
    if (c == it->second.compactness.end()) continue;
    sum += c->second.score;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace geolid::eval
