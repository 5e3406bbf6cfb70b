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
#ifndef GEOFLOW_CLEAN_HPP
#define GEOFLOW_CLEAN_HPP

#include "geoflow/ingest.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace geoflow
{

inline constexpr double kDefaultMaxSpeedKmh = 1000.0;
inline constexpr double kDefaultSourceCoverage = 0.95;

/// km/h between two events; +inf for a zero time gap with nonzero distance,
/// 0 for a zero gap at the same point.
double implied_speed_kmh(const GeoEvent& from, const GeoEvent& to);

struct SpeedFilterResult {
    Trajectory trajectory;
    std::size_t removed = 0;
};

/// Sequential scan against the last retained event: a later event is dropped
/// when the speed needed to reach it strictly exceeds max_speed_kmh. The first
/// event is always kept.
SpeedFilterResult speed_filter(const Trajectory& trajectory, double max_speed_kmh = kDefaultMaxSpeedKmh);

struct SpeedFilterSummary {
    TrajectoryMap trajectories;
    std::size_t removed = 0;
};

SpeedFilterSummary speed_filter(const TrajectoryMap& trajectories, double max_speed_kmh = kDefaultMaxSpeedKmh,
                                unsigned workers = 1);

/// What a source's popularity is measured in when ranking.
enum class PopularityWeight { Users, Events };

struct SourceFilterOptions {
    double coverage = kDefaultSourceCoverage;
    PopularityWeight weight = PopularityWeight::Users;
};

struct SourceRank {
    std::string source;
    std::int64_t users = 0;  ///< distinct users of this source in the country
    std::int64_t events = 0;
    bool retained = false;
};

/// country -> retained sources
using RetainedSources = std::map<std::string, std::set<std::string>>;

struct SourceFilterStats {
    std::size_t users_before = 0;
    std::size_t users_after = 0;
    std::size_t events_before = 0; ///< labelled events considered
    std::size_t events_after = 0;
    std::size_t unlabeled_events = 0; ///< dropped: no country to rank against

    double user_retention() const { return users_before ? double(users_after) / double(users_before) : 1.0; }
    double event_retention() const { return events_before ? double(events_after) / double(events_before) : 1.0; }
};

struct SourceFilterResult {
    std::map<std::string, std::vector<SourceRank>> rankings; ///< per country, in rank order
    RetainedSources retained;
    std::vector<GeoEvent> events;
    SourceFilterStats stats;
};

/// Cumulative walk over (name, weight) pairs already in rank order: names are
/// retained until the running total first reaches coverage * total weight.
/// Returns the number of leading entries retained.
std::size_t coverage_cutoff(std::span<const std::int64_t> ranked_weights, double coverage);

/// Per-country source ranking and filtering. Ranking is by popularity weight
/// descending, ties by source name ascending.
SourceFilterResult source_popularity_filter(std::span<const GeoEvent> events, const SourceFilterOptions& options = {});

/// Keeps labelled events whose (country, source) pair is in `retained`.
std::vector<GeoEvent> apply_source_filter(std::span<const GeoEvent> events, const RetainedSources& retained);

} // namespace geoflow

#endif
