// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace geolid::cli {

// Exit status: 0 success, 1 usage error, 2 runtime failure.
int run(int argc, const char* const* argv);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geolid::cli
