/*
 * Copyright (C) 2026 The geoflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef GEOFLOW_BOUNDARY_HPP
#define GEOFLOW_BOUNDARY_HPP

#include "geoflow/geo.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geoflow
{

/// True for two upper-case ASCII letters (ISO 3166-1 alpha-2 shape).
bool is_country_code(std::string_view code);

/// Planar vertex in degrees; x is longitude, y is latitude.
struct LonLat {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Closed ring: at least four vertices, first == last.
using Ring = std::vector<LonLat>;

struct Polygon {
    Ring outer;
    std::vector<Ring> holes;
};

struct CountryBoundary {
    std::string code;
    std::vector<Polygon> polygons;
};

/// Throws DataError if the ring is not closed, has fewer than four vertices,
/// leaves the coordinate ranges, or has an edge spanning more than 180 degrees
/// of longitude (rings crossing the antimeridian must be split upstream).
void validate_ring(const Ring& ring, const std::string& code);

/// Closed-set containment test for a polygon with holes: points on any ring
/// (outer or hole) count as contained. Interior test is even-odd ray casting.
bool polygon_contains(const Polygon& polygon, const LonLat& point);

/// Point lookup over a set of country boundaries.
///
/// Each polygon carries a bounding box used as a prefilter before the exact
/// test. Polygons are kept in code order so that a point on a shared border
/// resolves to the lexicographically smallest code among all polygons whose
/// closed region contains it.
class BoundaryIndex
{
public:
    BoundaryIndex() = default;
    /// Validates rings and code uniqueness; throws DataError on violation.
    explicit BoundaryIndex(std::vector<CountryBoundary> boundaries);

    std::optional<std::string> lookup(const LonLat& point) const;
    std::optional<std::string> lookup(const LatLon& point) const { return lookup(LonLat{point.lon, point.lat}); }

    bool empty() const { return entries_.empty(); }
    const std::vector<CountryBoundary>& boundaries() const { return boundaries_; }

private:
    struct Entry {
        std::size_t boundary;
        std::size_t polygon;
        double min_lon, max_lon, min_lat, max_lat;
    };
    std::vector<CountryBoundary> boundaries_;
    std::vector<Entry> entries_;
};

/// Reads a GeoJSON FeatureCollection. Each feature carries a `code` property
/// (ISO alpha-2) and a Polygon or MultiPolygon geometry in [lon, lat] order.
std::vector<CountryBoundary> read_boundaries_geojson(std::istream& in);
std::vector<CountryBoundary> read_boundaries_geojson(const std::filesystem::path& path);

} // namespace geoflow

#endif
