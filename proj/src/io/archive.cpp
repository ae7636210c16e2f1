// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/io/archive.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "geolid/errors.hpp"

namespace geolid::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'G', 'E', 'O', 'L', 'I', 'D', 'A', 'R'};
static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

template <class U>
void put(std::string& buf, U v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class U>
U take(const std::string& buf, std::size_t& pos, const fs::path& path) {
  if (pos + sizeof(U) > buf.size()) throw IoError("truncated archive " + path.string());
  U v;
  std::memcpy(&v, buf.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

std::size_t numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

const NamedTensor& Archive::at(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw NotFoundError("archive has no tensor '" + name + "'");
}

bool Archive::contains(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

std::uint32_t crc32_of(const void* data, std::size_t size, std::uint32_t crc) {
  const auto* p = static_cast<const Bytef*>(data);
  uLong c = crc;
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    c = ::crc32(c, p, chunk);
    p += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

std::uint32_t file_crc32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint32_t crc = 0;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    crc = crc32_of(buf, static_cast<std::size_t>(in.gcount()), crc);
  }
  return crc;
}

std::string hex32(std::uint32_t v) {
  char s[9];
  std::snprintf(s, sizeof s, "%08x", v);
  return s;
}

void write_archive(const fs::path& path, const Archive& archive) {
  json index = json::array();
  std::size_t offset = 0;
  for (const auto& t : archive.tensors) {
    if (numel(t.shape) != t.data.size()) {
      throw ShapeError("archive tensor '" + t.name + "': shape does not match data length");
    }
    index.push_back({{"name", t.name}, {"shape", t.shape}, {"dtype", "f32"}, {"offset", offset}});
    offset += t.data.size() * sizeof(float);
  }
  const std::string header = json{{"meta", archive.meta}, {"tensors", index}}.dump();

  std::string buf;
  buf.reserve(32 + header.size() + offset);
  buf.append(kMagic, sizeof kMagic);
  put<std::uint32_t>(buf, kArchiveVersion);
  put<std::uint64_t>(buf, header.size());
  buf += header;
  for (const auto& t : archive.tensors) {
    buf.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(float));
  }
  put<std::uint32_t>(buf, crc32_of(buf.data(), buf.size()));

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

Archive read_archive(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof kMagic + 16 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw IoError(path.string() + " is not a geolid archive");
  }
  std::uint32_t stored = 0;
  std::memcpy(&stored, buf.data() + buf.size() - 4, 4);
  if (crc32_of(buf.data(), buf.size() - 4) != stored) {
    throw IoError("checksum mismatch in " + path.string());
  }
  std::size_t pos = sizeof kMagic;
  const auto version = take<std::uint32_t>(buf, pos, path);
  if (version != kArchiveVersion) {
    throw IoError("unsupported archive version " + std::to_string(version) + " in " + path.string());
  }
  const auto header_len = take<std::uint64_t>(buf, pos, path);
  if (pos + header_len > buf.size() - 4) throw IoError("truncated archive " + path.string());
  Archive out;
  json header;
  try {
    header = json::parse(buf.substr(pos, header_len));
  } catch (const json::exception& e) {
    throw IoError("bad archive header in " + path.string() + ": " + e.what());
  }
  pos += header_len;
  const std::size_t payload = pos, payload_end = buf.size() - 4;
  out.meta = header.value("meta", json::object());
  for (const auto& item : header.at("tensors")) {
    NamedTensor t;
    t.name = item.at("name").get<std::string>();
    t.shape = item.at("shape").get<std::vector<std::size_t>>();
    if (item.at("dtype").get<std::string>() != "f32") {
      throw IoError("tensor '" + t.name + "' has unsupported dtype");
    }
    const auto off = item.at("offset").get<std::size_t>();
    const std::size_t n = numel(t.shape);
    if (payload + off + n * sizeof(float) > payload_end) {
      throw IoError("tensor '" + t.name + "' runs past the payload in " + path.string());
    }
    t.data.resize(n);
    std::memcpy(t.data.data(), buf.data() + payload + off, n * sizeof(float));
    out.tensors.push_back(std::move(t));
  }
  return out;
}

}  // namespace geolid::io
