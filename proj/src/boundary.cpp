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
#include "geoflow/boundary.hpp"
#include "geoflow/csv.hpp"
#include "geoflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace geoflow
{

bool is_country_code(std::string_view code)
{
    return code.size() == 2 && code[0] >= 'A' && code[0] <= 'Z' && code[1] >= 'A' && code[1] <= 'Z';
}

void validate_ring(const Ring& ring, const std::string& code)
{
    if (ring.size() < 4)
        throw DataError(fmt::format("{}: ring has {} vertices, need at least 4", code, ring.size()));
    if (!(ring.front() == ring.back()))
        throw DataError(fmt::format("{}: ring is not closed", code));
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const auto& v = ring[i];
        if (!std::isfinite(v.lon) || !std::isfinite(v.lat) || v.lat < -90.0 || v.lat > 90.0 ||
            v.lon < -180.0 || v.lon > 180.0)
            throw DataError(fmt::format("{}: vertex {} out of range", code, i));
        if (i > 0 && std::fabs(v.lon - ring[i - 1].lon) > 180.0)
            throw DataError(fmt::format("{}: edge {} crosses the antimeridian; split the polygon", code, i));
    }
}

namespace
{

bool on_segment(const LonLat& a, const LonLat& b, const LonLat& p)
{
    const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if (cross != 0.0)
        return false;
    return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
           p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

bool on_ring(const Ring& ring, const LonLat& p)
{
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        if (on_segment(ring[i], ring[i + 1], p))
            return true;
    return false;
}

// even-odd rule; the result on the ring itself is unspecified
bool ring_encloses(const Ring& ring, const LonLat& p)
{
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const auto& a = ring[i];
        const auto& b = ring[j];
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
            const double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
            if (p.lon < x)
                inside = !inside;
        }
    }
    return inside;
}

} // namespace

bool polygon_contains(const Polygon& polygon, const LonLat& point)
{
    if (on_ring(polygon.outer, point))
        return true;
    for (const auto& hole : polygon.holes)
        if (on_ring(hole, point))
            return true;
    if (!ring_encloses(polygon.outer, point))
        return false;
    for (const auto& hole : polygon.holes)
        if (ring_encloses(hole, point))
            return false;
    return true;
}

BoundaryIndex::BoundaryIndex(std::vector<CountryBoundary> boundaries)
    : boundaries_(std::move(boundaries))
{
    std::sort(boundaries_.begin(), boundaries_.end(),
              [](const CountryBoundary& a, const CountryBoundary& b) { return a.code < b.code; });
    for (std::size_t b = 0; b < boundaries_.size(); ++b) {
        const auto& country = boundaries_[b];
        if (!is_country_code(country.code))
            throw DataError("invalid country code '" + country.code + "'");
        if (b > 0 && boundaries_[b - 1].code == country.code)
            throw DataError("duplicate country code '" + country.code + "'");
        for (std::size_t p = 0; p < country.polygons.size(); ++p) {
            const auto& poly = country.polygons[p];
            validate_ring(poly.outer, country.code);
            for (const auto& hole : poly.holes)
                validate_ring(hole, country.code);
            Entry e{b, p, poly.outer[0].lon, poly.outer[0].lon, poly.outer[0].lat, poly.outer[0].lat};
            for (const auto& v : poly.outer) {
                e.min_lon = std::min(e.min_lon, v.lon);
                e.max_lon = std::max(e.max_lon, v.lon);
                e.min_lat = std::min(e.min_lat, v.lat);
                e.max_lat = std::max(e.max_lat, v.lat);
            }
            entries_.push_back(e);
        }
    }
}

std::optional<std::string> BoundaryIndex::lookup(const LonLat& point) const
{
    // entries are in code order, so the first hit is the smallest code
    for (const auto& e : entries_) {
        if (point.lon < e.min_lon || point.lon > e.max_lon || point.lat < e.min_lat || point.lat > e.max_lat)
            continue;
        if (polygon_contains(boundaries_[e.boundary].polygons[e.polygon], point))
            return boundaries_[e.boundary].code;
    }
    return std::nullopt;
}

namespace
{

using nlohmann::json;

Ring parse_ring(const json& j)
{
    Ring ring;
    for (const auto& v : j) {
        if (!v.is_array() || v.size() < 2 || !v[0].is_number() || !v[1].is_number())
            throw DataError("boundary vertex must be [lon, lat]");
        ring.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return ring;
}

Polygon parse_polygon(const json& j)
{
    if (!j.is_array() || j.empty())
        throw DataError("polygon must be a non-empty array of rings");
    Polygon poly;
    poly.outer = parse_ring(j[0]);
    for (std::size_t i = 1; i < j.size(); ++i)
        poly.holes.push_back(parse_ring(j[i]));
    return poly;
}

} // namespace

std::vector<CountryBoundary> read_boundaries_geojson(std::istream& in)
{
    json doc;
    try {
        doc = json::parse(in);
    }
    catch (const json::exception& e) {
        throw DataError(std::string("boundary file is not valid JSON: ") + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features") || !doc["features"].is_array())
        throw DataError("boundary file must be a GeoJSON FeatureCollection");

    std::vector<CountryBoundary> out;
    for (const auto& feature : doc["features"]) {
        const auto& props = feature.contains("properties") ? feature["properties"] : json();
        if (!props.is_object() || !props.contains("code") || !props["code"].is_string())
            throw DataError("every feature needs a string 'code' property");
        CountryBoundary country;
        country.code = props["code"].get<std::string>();
        const auto& geom = feature.contains("geometry") ? feature["geometry"] : json();
        if (!geom.is_object() || !geom.contains("coordinates"))
            throw DataError(country.code + ": feature has no geometry");
        const std::string type = geom.value("type", "");
        if (type == "Polygon") {
            country.polygons.push_back(parse_polygon(geom["coordinates"]));
        }
        else if (type == "MultiPolygon") {
            for (const auto& p : geom["coordinates"])
                country.polygons.push_back(parse_polygon(p));
        }
        else {
            throw DataError(country.code + ": unsupported geometry type '" + type + "'");
        }
        out.push_back(std::move(country));
    }
    return out;
}

std::vector<CountryBoundary> read_boundaries_geojson(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_boundaries_geojson(in);
}

} // namespace geoflow
