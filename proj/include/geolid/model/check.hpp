// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "geolid/autodiff/gradcheck.hpp"
#include "geolid/model/model.hpp"

namespace geolid::model {

// Uniform waveforms in [-1, 1), uniform targets in [0, 1), labels cycling
// through the classes.
template <class T>
Batch<T> random_batch(const ModelConfig& cfg, std::size_t size, std::uint64_t seed);

// Central-difference check of the total loss of a double-precision model. The
// detached predictions are pinned at their unperturbed values, so the numeric
// side measures the differentiable path only.
ad::GradcheckResult gradcheck_model(const ModelConfig& cfg, std::uint64_t seed,
                                    std::size_t batch_size = 4,
                                    const ad::GradcheckOptions& options = {});

}  // namespace geolid::model
