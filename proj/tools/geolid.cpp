// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/cli.hpp"

int main(int argc, char** argv) { return geolid::cli::run(argc, argv); }
