// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include <omp.h>

#include <algorithm>

#include "geolid/kernels/kernels.hpp"

namespace geolid::kernels {

void set_num_threads(int threads) { omp_set_num_threads(std::max(1, threads)); }

int num_threads() { return omp_get_max_threads(); }

}  // namespace geolid::kernels
