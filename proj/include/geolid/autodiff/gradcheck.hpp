// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "geolid/autodiff/params.hpp"

namespace geolid::ad {

// Binds every weight of `params` as a leaf on `tape` (or as a constant when
// tape is null). Buffers are always constants.
template <class T>
std::map<std::string, Tensor<T>> bind(const ParameterSet<T>& params, Tape<T>* tape) {
  std::map<std::string, Tensor<T>> out;
  for (const auto& [name, p] : params) {
    if (tape != nullptr && p.kind == ParamKind::weight) {
      out.emplace(name, tape->leaf(p.value, name));
    } else {
      out.emplace(name, p.value.detach());
    }
  }
  return out;
}

// A scalar function of a parameter set. When `tape` is non-null the function
// must record on it with the weights bound as leaves (see bind()); when null it
// is evaluated for its value only.
using ScalarFunction = std::function<Tensor<double>(ParameterSet<double>& params, Tape<double>* tape)>;

struct GradcheckOptions {
  double epsilon = 1e-5;
  // Above this many weight entries a deterministic random subset is checked.
  std::size_t max_entries = 10000;
  std::uint64_t seed = 0x5eed;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double floor = 1e-4;
  // Entries whose plain central difference misses `tolerance` are re-estimated
  // by Richardson extrapolation over steps epsilon and epsilon/2, which cancels
  // the second-order truncation error near sharply curved points.
  bool refine = true;
  double tolerance = 1e-4;
};

struct GradcheckResult {
  double max_rel_error = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0;
  double worst_numeric = 0;
  std::size_t checked = 0;
  // Entries whose +/- epsilon evaluations crossed a non-smooth point (a relu
  // changing sign, a different max); the central difference is meaningless
  // there, so they are counted and left out of max_rel_error.
  std::size_t skipped_kinks = 0;
  std::size_t refined = 0;  // entries judged on the extrapolated estimate
};

// Central-difference comparison against the tape's gradients. Throws
// NumericError when the function value is not finite.
GradcheckResult gradcheck(const ScalarFunction& fn, ParameterSet<double> params,
                          const GradcheckOptions& options = {});

}  // namespace geolid::ad
