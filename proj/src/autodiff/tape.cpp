// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "geolid/autodiff/tape.hpp"
#include "geolid/autodiff/tensor.hpp"

namespace geolid::ad {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

}  // namespace geolid::ad
