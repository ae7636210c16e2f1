// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/geovec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "geolid/errors.hpp"

namespace geolid::geo {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& field, std::size_t line) {
  double v = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError("not a number: '" + field + "'", line);
  return v;
}
}  // namespace

GeoCoordinate::GeoCoordinate(double latitude_deg, double longitude_deg)
    : lat_(latitude_deg), lon_(longitude_deg) {
  if (!(latitude_deg >= -90.0 && latitude_deg <= 90.0)) {
    throw std::out_of_range("latitude " + std::to_string(latitude_deg) + " outside [-90, 90]");
  }
  if (!(longitude_deg > -180.0 && longitude_deg <= 180.0)) {
    throw std::out_of_range("longitude " + std::to_string(longitude_deg) + " outside (-180, 180]");
  }
}

UnitVector GeoCoordinate::to_unit_vector() const {
  const double lat = lat_ * kDegToRad, lon = lon_ * kDegToRad;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

GeoCoordinate GeoCoordinate::from_unit_vector(const UnitVector& v) {
  const double z = std::clamp(v[2], -1.0, 1.0);
  const double lat = std::asin(z) * kRadToDeg;
  double lon = std::atan2(v[1], v[0]) * kRadToDeg;
  if (lon <= -180.0) lon = 180.0;
  return GeoCoordinate(std::clamp(lat, -90.0, 90.0), lon);
}

ReferenceLattice fibonacci_lattice(std::size_t count) {
  if (count == 0) throw std::invalid_argument("fibonacci_lattice: count must be positive");
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double n = static_cast<double>(count);
  ReferenceLattice lattice;
  lattice.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = static_cast<double>(i) * golden_angle;
    lattice.points.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return lattice;
}

double great_circle_distance(const GeoCoordinate& a, const GeoCoordinate& b) {
  const double lat1 = a.latitude_deg() * kDegToRad, lat2 = b.latitude_deg() * kDegToRad;
  const double dlat = lat2 - lat1;
  const double dlon = (b.longitude_deg() - a.longitude_deg()) * kDegToRad;
  const double s1 = std::sin(dlat / 2), s2 = std::sin(dlon / 2);
  const double h = std::clamp(s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2, 0.0, 1.0);
  return 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

GeoVector geo_vector(const GeoCoordinate& coord, const ReferenceLattice& lattice) {
  if (lattice.count() == 0) throw std::invalid_argument("geo_vector: empty lattice");
  GeoVector out;
  out.values.reserve(lattice.count());
  for (const auto& p : lattice.points) {
    const double d = great_circle_distance(coord, GeoCoordinate::from_unit_vector(p));
    out.values.push_back(std::clamp(d / std::numbers::pi, 0.0, 1.0));
  }
  return out;
}

void LanguageGeoTable::add(const std::string& code, const GeoCoordinate& coord) {
  if (entries_.count(code)) throw DuplicateKeyError("language '" + code + "' listed twice");
  entries_.emplace(code, LanguageGeo{coord, geo_vector(coord, lattice_)});
}

const LanguageGeo& LanguageGeoTable::at(const std::string& code) const {
  auto it = entries_.find(code);
  if (it == entries_.end()) throw NotFoundError("no geolocation for language '" + code + "'");
  return it->second;
}

LanguageGeoTable load_language_geolocations(const std::filesystem::path& path,
                                            const ReferenceLattice& lattice) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open language table " + path.string());
  LanguageGeoTable table(lattice);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 3 || fields[0].empty()) {
      throw ParseError("expected 'code,lat,lon', got '" + text + "'", line);
    }
    const double lat = parse_double(fields[1], line);
    const double lon = parse_double(fields[2], line);
    try {
      table.add(fields[0], GeoCoordinate(lat, lon));
    } catch (const std::out_of_range& e) {
      throw ParseError(e.what(), line);
    }
  }
  return table;
}

}  // namespace geolid::geo
