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
#ifndef GEOFLOW_RESIDENCE_HPP
#define GEOFLOW_RESIDENCE_HPP

#include "geoflow/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace geoflow
{

struct UserProfile {
    std::string user_id;
    std::map<std::string, std::int64_t> counts;     ///< country -> events
    std::map<std::string, std::int64_t> first_seen; ///< country -> earliest timestamp
    std::string residence;
    std::int64_t total_events = 0;
    int distinct_countries = 0;

    friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

using ProfileMap = std::map<std::string, UserProfile>;

/// Country with the most events; ties go to the earliest first_seen, then to
/// the smallest code. `counts` must be non-empty.
std::string assign_residence(const std::map<std::string, std::int64_t>& counts,
                             const std::map<std::string, std::int64_t>& first_seen);

/// Profile of one trajectory; unlabelled events are ignored. Returns nullopt
/// when no event carries a country.
std::optional<UserProfile> build_profile(const Trajectory& trajectory);

ProfileMap build_profiles(const TrajectoryMap& trajectories, unsigned workers = 1);

struct CensusEntry {
    std::int64_t population = 0;
    std::optional<double> gdp_per_capita;
};

using Census = std::map<std::string, CensusEntry>;

/// Reads `code,population[,gdp_per_capita]` with a header row.
Census read_census(const std::filesystem::path& path);

struct ResidenceThresholds {
    double min_penetration = 0.0005;
    std::int64_t min_residents = 10000;
};

struct CountryStats {
    std::string code;
    std::int64_t residents = 0;
    std::optional<std::int64_t> population;
    std::optional<double> gdp_per_capita;
    double penetration = 0.0; ///< residents / population, 0 without census
    bool included = false;
    std::string reason; ///< why excluded; empty when included
};

using CountryStatsMap = std::map<std::string, CountryStats>;

/// Stats for every country that is a residence or appears in the census.
CountryStatsMap compute_country_stats(const ProfileMap& profiles, const Census& census,
                                      const ResidenceThresholds& thresholds = {});

} // namespace geoflow

#endif
