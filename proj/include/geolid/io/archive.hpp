// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Named-tensor archive used for checkpoints and embedding dumps.
//
//   "GEOLIDAR"            8-byte magic
//   u32 version           little-endian
//   u64 header length
//   header                JSON: {"meta": {...}, "tensors": [{name, shape,
//                         dtype, offset}, ...]}; offsets are bytes into the
//                         payload
//   payload               little-endian IEEE-754 float32 values
//   u32 CRC-32            over every preceding byte

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace geolid::io {

inline constexpr std::uint32_t kArchiveVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

struct Archive {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const NamedTensor& at(const std::string& name) const;  // NotFoundError
  bool contains(const std::string& name) const;
};

// Written to a temporary file and renamed into place, so an existing archive
// at `path` survives a failed write.
void write_archive(const std::filesystem::path& path, const Archive& archive);

// IoError on truncation, bad magic, unsupported version or checksum mismatch.
Archive read_archive(const std::filesystem::path& path);

std::uint32_t crc32_of(const void* data, std::size_t size, std::uint32_t crc = 0);
std::uint32_t file_crc32(const std::filesystem::path& path);
std::string hex32(std::uint32_t v);

}  // namespace geolid::io
