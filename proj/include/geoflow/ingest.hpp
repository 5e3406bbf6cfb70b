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
#ifndef GEOFLOW_INGEST_HPP
#define GEOFLOW_INGEST_HPP

#include "geoflow/boundary.hpp"
#include "geoflow/geo.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geoflow
{

/// One geo-located message.
struct GeoEvent {
    std::string user_id;
    std::int64_t timestamp = 0; ///< UTC seconds since epoch, >= 0
    double lat = 0.0;
    double lon = 0.0;
    std::string source;                 ///< posting client application
    std::optional<std::string> country; ///< ISO 3166-1 alpha-2

    LatLon position() const { return {lat, lon}; }

    friend bool operator==(const GeoEvent&, const GeoEvent&) = default;
};

/// Time-ordered events of a single user.
struct Trajectory {
    std::string user_id;
    std::vector<GeoEvent> events;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

using TrajectoryMap = std::map<std::string, Trajectory>;

struct EventFormat {
    char delimiter = ',';
    /// Treat the first non-blank line as a header when its second field is
    /// not an integer.
    bool detect_header = true;
};

struct LineError {
    std::size_t line = 0; ///< 1-based
    std::string message;
};

struct ParseResult {
    std::vector<GeoEvent> events;
    std::vector<LineError> errors;
    std::size_t data_lines = 0; ///< non-blank, non-header lines seen
    bool had_header = false;
};

/// Parses `user_id,timestamp,lat,lon,source[,country]` lines. Malformed lines
/// are reported in ParseResult::errors and skipped; a stream that cannot be
/// read is an InputError.
ParseResult parse_events(std::istream& in, const EventFormat& format = {});

/// Writes events in the same line format, with a header and a country column.
void write_events(std::ostream& out, std::span<const GeoEvent> events);

/// Pre-labelled events keep their label; otherwise the boundary lookup decides.
std::optional<std::string> assign_country(const GeoEvent& event, const BoundaryIndex& boundaries);

/// Labels every unlabelled event in place. Returns the number of events that
/// remain without a country.
std::size_t label_events(std::vector<GeoEvent>& events, const BoundaryIndex& boundaries,
                         unsigned workers = 1);

/// Groups events by user; within a user, events are stably sorted by timestamp.
TrajectoryMap build_trajectories(std::vector<GeoEvent> events, unsigned workers = 1);

/// Concatenation of all trajectories in user_id order.
std::vector<GeoEvent> flatten(const TrajectoryMap& trajectories);

} // namespace geoflow

#endif
