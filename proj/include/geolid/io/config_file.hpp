// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Flat `key = value` files. '#' starts a comment (whole line or trailing);
// blank lines are ignored. Keys are unique.

#include <filesystem>
#include <map>
#include <string>

namespace geolid::io {

using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(const std::string& text);  // ParseError, DuplicateKeyError
ConfigMap read_config_file(const std::filesystem::path& path);  // plus IoError
std::string format_config(const ConfigMap& values);

}  // namespace geolid::io
