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
#include "geoflow/ingest.hpp"
#include "geoflow/csv.hpp"
#include "geoflow/error.hpp"
#include "geoflow/parallel.hpp"

#include <algorithm>
#include <iterator>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace geoflow
{

namespace
{

// Returns an error message, or empty on success.
std::string parse_fields(const std::vector<std::string>& f, GeoEvent& ev)
{
    if (f.size() != 5 && f.size() != 6)
        return "expected 5 or 6 fields, got " + std::to_string(f.size());
    if (f[0].empty())
        return "empty user_id";
    auto ts = parse_int(f[1]);
    if (!ts)
        return "timestamp is not an integer";
    if (*ts < 0)
        return "negative timestamp";
    auto lat = parse_double(f[2]);
    auto lon = parse_double(f[3]);
    if (!lat || !lon)
        return "lat/lon is not a number";
    if (*lat < -90.0 || *lat > 90.0)
        return "latitude out of range";
    if (*lon < -180.0 || *lon > 180.0)
        return "longitude out of range";

    ev.user_id = f[0];
    ev.timestamp = *ts;
    ev.lat = *lat;
    ev.lon = *lon == -180.0 ? 180.0 : *lon;
    ev.source = f[4];
    ev.country.reset();
    if (f.size() == 6 && !f[5].empty()) {
        if (!is_country_code(f[5]))
            return "country is not an ISO alpha-2 code";
        ev.country = f[5];
    }
    return {};
}

} // namespace

ParseResult parse_events(std::istream& in, const EventFormat& format)
{
    if (!in)
        throw InputError("event stream is not readable");
    ParseResult result;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        auto fields = split_csv(line, format.delimiter);
        if (first) {
            first = false;
            if (format.detect_header && fields && fields->size() >= 2 && !parse_int((*fields)[1])) {
                result.had_header = true;
                continue;
            }
        }
        ++result.data_lines;
        if (!fields) {
            result.errors.push_back({lineno, "unterminated quote"});
            continue;
        }
        GeoEvent ev;
        if (auto err = parse_fields(*fields, ev); !err.empty()) {
            result.errors.push_back({lineno, std::move(err)});
            continue;
        }
        result.events.push_back(std::move(ev));
    }
    if (in.bad())
        throw InputError("I/O error while reading event stream");
    return result;
}

void write_events(std::ostream& out, std::span<const GeoEvent> events)
{
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "user_id,timestamp,lat,lon,source,country\n");
    for (const auto& ev : events) {
        fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{}\n", csv_field(ev.user_id), ev.timestamp,
                       format_number(ev.lat), format_number(ev.lon), csv_field(ev.source), ev.country.value_or(""));
        if (buf.size() > (1 << 16)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::optional<std::string> assign_country(const GeoEvent& event, const BoundaryIndex& boundaries)
{
    if (event.country)
        return event.country;
    return boundaries.lookup(LonLat{event.lon, event.lat});
}

std::size_t label_events(std::vector<GeoEvent>& events, const BoundaryIndex& boundaries, unsigned workers)
{
    parallel_for(events.size(), workers, [&](std::size_t i) {
        if (!events[i].country)
            events[i].country = boundaries.lookup(LonLat{events[i].lon, events[i].lat});
    });
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [](const GeoEvent& e) { return !e.country; }));
}

TrajectoryMap build_trajectories(std::vector<GeoEvent> events, unsigned workers)
{
    TrajectoryMap out;
    for (auto& ev : events) {
        auto& traj = out[ev.user_id];
        if (traj.user_id.empty())
            traj.user_id = ev.user_id;
        traj.events.push_back(std::move(ev));
    }
    std::vector<Trajectory*> slots;
    slots.reserve(out.size());
    for (auto& [_, t] : out)
        slots.push_back(&t);
    parallel_for(slots.size(), workers, [&](std::size_t i) {
        std::stable_sort(slots[i]->events.begin(), slots[i]->events.end(),
                         [](const GeoEvent& a, const GeoEvent& b) { return a.timestamp < b.timestamp; });
    });
    return out;
}

std::vector<GeoEvent> flatten(const TrajectoryMap& trajectories)
{
    std::vector<GeoEvent> out;
    for (const auto& [_, t] : trajectories)
        out.insert(out.end(), t.events.begin(), t.events.end());
    return out;
}

} // namespace geoflow
