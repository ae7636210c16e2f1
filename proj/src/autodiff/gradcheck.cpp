// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "geolid/autodiff/branch.hpp"

namespace geolid::ad {

namespace {

double eval(const ScalarFunction& fn, ParameterSet<double>& params, std::uint64_t& branches) {
  BranchRecorder rec;
  const Tensor<double> v = [&] {
    BranchScope scope(rec);
    return fn(params, nullptr);
  }();
  branches = rec.digest();
  const double x = v.item();
  if (!std::isfinite(x)) throw NumericError("gradcheck: function value is not finite");
  return x;
}

}  // namespace

GradcheckResult gradcheck(const ScalarFunction& fn, ParameterSet<double> params,
                          const GradcheckOptions& options) {
  Gradients<double> analytic;
  std::uint64_t base_branches = 0;
  eval(fn, params, base_branches);
  {
    Tape<double> tape;
    const Tensor<double> loss = fn(params, &tape);
    if (!std::isfinite(loss.item())) throw NumericError("gradcheck: function value is not finite");
    analytic = backward(loss, params);
  }

  std::vector<std::pair<std::string, std::size_t>> entries;
  for (const auto& [name, p] : params) {
    if (p.kind != ParamKind::weight) continue;
    for (std::size_t i = 0; i < p.value.size(); ++i) entries.emplace_back(name, i);
  }
  if (entries.size() > options.max_entries) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    entries.resize(options.max_entries);
  }

  GradcheckResult result;
  for (const auto& [name, i] : entries) {
    const Tensor<double> original = params.value(name);
    bool smooth = true;
    // Central difference with step h, divided by the step actually taken.
    auto central = [&](double h) {
      Tensor<double> plus = original, minus = original;
      plus.mutable_data()[i] += h;
      minus.mutable_data()[i] -= h;
      std::uint64_t bp = 0, bm = 0;
      params.set_value(name, plus);
      const double f_plus = eval(fn, params, bp);
      params.set_value(name, minus);
      const double f_minus = eval(fn, params, bm);
      params.set_value(name, original);
      smooth = smooth && bp == base_branches && bm == base_branches;
      return (f_plus - f_minus) / (plus[i] - minus[i]);
    };
    const double a = analytic.at(name)[i];
    auto rel_error = [&](double numeric) {
      return std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), options.floor});
    };

    double numeric = central(options.epsilon);
    if (!smooth) {
      ++result.skipped_kinks;
      continue;
    }
    double rel = rel_error(numeric);
    if (rel > options.tolerance && options.refine) {
      const double half = central(options.epsilon / 2);
      if (!smooth) {
        ++result.skipped_kinks;
        continue;
      }
      numeric = (4 * half - numeric) / 3;
      rel = rel_error(numeric);
      ++result.refined;
    }
    ++result.checked;
    if (rel >= result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_param = name;
      result.worst_index = i;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace geolid::ad
