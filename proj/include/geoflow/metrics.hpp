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
#ifndef GEOFLOW_METRICS_HPP
#define GEOFLOW_METRICS_HPP

#include "geoflow/geo.hpp"
#include "geoflow/ingest.hpp"
#include "geoflow/residence.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geoflow
{

/// A user is mobile when seen in at least one country besides the residence.
bool is_mobile(const UserProfile& profile);

/// Mobile residents / residents; nullopt when the country has no residents.
std::optional<double> mobility_rate(const std::string& country, const ProfileMap& profiles);

/// Number of distinct foreign countries seen in any resident's counts.
int destination_diversity(const std::string& country, const ProfileMap& profiles);

/// Normalised mean of the unit position vectors. Returns nullopt when the mean
/// vector is shorter than 1e-12 (e.g. antipodal pairs); callers fall back to
/// the first point. Throws DataError on an empty input.
std::optional<LatLon> center_of_mass(std::span<const LatLon> points);

/// Root-mean-square great-circle distance from the spherical centre of mass.
double radius_of_gyration(std::span<const LatLon> points);

/// Great-circle lengths of consecutive hops; empty for fewer than two events.
std::vector<double> displacements(const Trajectory& trajectory);

struct UserMetrics {
    std::string user_id;
    std::string residence;
    std::int64_t n_events = 0;
    int distinct_countries = 0;
    double radius_km = 0.0;
    bool mobile = false;
};

std::vector<UserMetrics> compute_user_metrics(const ProfileMap& profiles, const TrajectoryMap& trajectories,
                                              unsigned workers = 1);

enum class RadiusPopulation { AllResidents, MobileOnly };

struct MobilityProfile {
    std::string country;
    std::int64_t n_residents = 0;
    std::int64_t n_mobile = 0;
    double mobility_rate = 0.0;
    double mean_radius_km = 0.0;
    int countries_visited = 0;
};

/// One row per residence country, in code order.
std::vector<MobilityProfile> mobility_profiles(const ProfileMap& profiles, std::span<const UserMetrics> users,
                                               RadiusPopulation radius_over = RadiusPopulation::AllResidents);

/// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
int days_in_year(int year);

enum class Direction { Outbound, Inbound };

struct DailySeries {
    std::string country; ///< "*" for the global aggregate
    Direction direction = Direction::Outbound;
    std::vector<std::int64_t> values;
    std::vector<double> normalized; ///< 100 * value / max, all zero when max is 0
};

/// 100 * v / max(v); all zeros when max(v) == 0.
std::vector<double> normalize_series(std::span<const std::int64_t> values);

/// Distinct users abroad per UTC day of `year`.
///
/// Outbound for country C counts residents of C with an event outside C that
/// day; inbound for C counts non-residents with an event in C that day. Series
/// exist for every residence (outbound) or visited country (inbound).
std::map<std::string, DailySeries> daily_abroad_series(const ProfileMap& profiles,
                                                       const TrajectoryMap& trajectories, Direction direction,
                                                       int year);

/// Distinct users with any foreign event per day, world-wide.
DailySeries global_abroad_series(const ProfileMap& profiles, const TrajectoryMap& trajectories, int year);

} // namespace geoflow

#endif
