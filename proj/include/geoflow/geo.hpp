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
#ifndef GEOFLOW_GEO_HPP
#define GEOFLOW_GEO_HPP

#include <array>
#include <span>
#include <vector>

namespace geoflow
{

/// Mean Earth radius (IUGG), kilometres.
inline constexpr double kEarthRadiusKm = 6371.0088;

inline constexpr double kPi = 3.14159265358979323846;

struct LatLon {
    double lat = 0.0; ///< degrees, [-90, 90]
    double lon = 0.0; ///< degrees, (-180, 180]

    friend bool operator==(const LatLon&, const LatLon&) = default;
};

using Vec3 = std::array<double, 3>;

/// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const LatLon& a, const LatLon& b);

/// Unit position vector of a point on the sphere.
Vec3 to_unit_vector(const LatLon& p);

/// Inverse of to_unit_vector; the input need not be normalised but must be non-zero.
LatLon from_vector(const Vec3& v);

/// Maps longitude into (-180, 180].
double normalize_lon(double lon);

/// Point reached after travelling distance_km along the initial bearing
/// (degrees clockwise from north).
LatLon destination_point(const LatLon& start, double bearing_deg, double distance_km);

/// Correctly rounded sum of the values (Shewchuk's exact partials, as in
/// Python's math.fsum). Independent of summation order.
double exact_sum(std::span<const double> values);

} // namespace geoflow

#endif
