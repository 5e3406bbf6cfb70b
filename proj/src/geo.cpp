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
#include "geoflow/geo.hpp"

#include <algorithm>
#include <cmath>

namespace geoflow
{

namespace
{
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }
} // namespace

double haversine_km(const LatLon& a, const LatLon& b)
{
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dphi = phi2 - phi1;
    const double dlambda = deg2rad(b.lon - a.lon);
    const double s1 = std::sin(dphi / 2);
    const double s2 = std::sin(dlambda / 2);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

Vec3 to_unit_vector(const LatLon& p)
{
    const double phi = deg2rad(p.lat);
    const double lambda = deg2rad(p.lon);
    return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi)};
}

LatLon from_vector(const Vec3& v)
{
    const double hyp = std::hypot(v[0], v[1]);
    LatLon out;
    out.lat = rad2deg(std::atan2(v[2], hyp));
    out.lon = normalize_lon(rad2deg(std::atan2(v[1], v[0])));
    return out;
}

double normalize_lon(double lon)
{
    if (lon > -180.0 && lon <= 180.0)
        return lon;
    double r = std::fmod(lon + 180.0, 360.0);
    if (r <= 0.0)
        r += 360.0;
    return r - 180.0;
}

LatLon destination_point(const LatLon& start, double bearing_deg, double distance_km)
{
    const double delta = distance_km / kEarthRadiusKm;
    const double theta = deg2rad(bearing_deg);
    const double phi1 = deg2rad(start.lat);
    const double lambda1 = deg2rad(start.lon);
    const double sin_phi2 =
        std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
    const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
    const double lambda2 =
        lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                             std::cos(delta) - std::sin(phi1) * sin_phi2);
    return {rad2deg(phi2), normalize_lon(rad2deg(lambda2))};
}

double exact_sum(std::span<const double> values)
{
    std::vector<double> partials;
    for (double x : values) {
        std::size_t i = 0;
        for (double y : partials) {
            if (std::fabs(x) < std::fabs(y))
                std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0)
                partials[i++] = lo;
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }

    std::size_t n = partials.size();
    if (n == 0)
        return 0.0;
    double hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials[--n];
        hi = x + y;
        lo = y - (hi - x);
        if (lo != 0.0)
            break;
    }
    // round-half-even correction when the remaining partials push past a tie
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        if (y == x - hi)
            hi = x;
    }
    return hi;
}

} // namespace geoflow
