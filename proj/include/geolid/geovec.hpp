// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Geolocation vectors: a language's coordinate encoded as its normalized
// great-circle distances to a fixed set of reference points spread over the
// sphere by a spherical Fibonacci lattice.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace geolid::geo {

using UnitVector = std::array<double, 3>;

// Latitude in [-90, 90], longitude in (-180, 180], both in degrees.
class GeoCoordinate {
 public:
  GeoCoordinate(double latitude_deg, double longitude_deg);

  double latitude_deg() const noexcept { return lat_; }
  double longitude_deg() const noexcept { return lon_; }

  UnitVector to_unit_vector() const;
  static GeoCoordinate from_unit_vector(const UnitVector& v);

  friend bool operator==(const GeoCoordinate&, const GeoCoordinate&) = default;

 private:
  double lat_;
  double lon_;
};

struct ReferenceLattice {
  std::vector<UnitVector> points;
  std::size_t count() const noexcept { return points.size(); }
};

// Point i of n: z = 1 - (2i+1)/n, azimuth i * pi * (3 - sqrt 5).
ReferenceLattice fibonacci_lattice(std::size_t count);

// Central angle in radians, [0, pi]. Haversine form.
double great_circle_distance(const GeoCoordinate& a, const GeoCoordinate& b);

struct GeoVector {
  std::vector<double> values;  // each in [0, 1]; 0 at the reference point, 1 at its antipode
  std::size_t size() const noexcept { return values.size(); }
};

GeoVector geo_vector(const GeoCoordinate& coord, const ReferenceLattice& lattice);

struct LanguageGeo {
  GeoCoordinate coord;
  GeoVector vector;
};

// Language code -> coordinate and its precomputed geolocation vector.
class LanguageGeoTable {
 public:
  LanguageGeoTable() = default;
  explicit LanguageGeoTable(ReferenceLattice lattice) : lattice_(std::move(lattice)) {}

  // Throws DuplicateKeyError if the code exists.
  void add(const std::string& code, const GeoCoordinate& coord);

  bool contains(const std::string& code) const { return entries_.count(code) != 0; }
  const LanguageGeo& at(const std::string& code) const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t dimension() const noexcept { return lattice_.count(); }
  const ReferenceLattice& lattice() const noexcept { return lattice_; }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  ReferenceLattice lattice_;
  std::map<std::string, LanguageGeo> entries_;
};

// Reads `code,lat,lon` records, one per line; '#' starts a comment line.
LanguageGeoTable load_language_geolocations(const std::filesystem::path& path,
                                            const ReferenceLattice& lattice);

}  // namespace geolid::geo
