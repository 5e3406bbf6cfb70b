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
#include "geoflow/clean.hpp"
#include "geoflow/error.hpp"
#include "geoflow/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace geoflow
{

double implied_speed_kmh(const GeoEvent& from, const GeoEvent& to)
{
    const double dist = haversine_km(from.position(), to.position());
    const auto dt = to.timestamp - from.timestamp;
    if (dt == 0)
        return dist == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return dist / (static_cast<double>(dt < 0 ? -dt : dt) / 3600.0);
}

SpeedFilterResult speed_filter(const Trajectory& trajectory, double max_speed_kmh)
{
    SpeedFilterResult out;
    out.trajectory.user_id = trajectory.user_id;
    const GeoEvent* last = nullptr;
    for (const auto& ev : trajectory.events) {
        if (last && implied_speed_kmh(*last, ev) > max_speed_kmh) {
            ++out.removed;
            continue;
        }
        out.trajectory.events.push_back(ev);
        last = &ev;
    }
    return out;
}

SpeedFilterSummary speed_filter(const TrajectoryMap& trajectories, double max_speed_kmh, unsigned workers)
{
    std::vector<const Trajectory*> in;
    in.reserve(trajectories.size());
    for (const auto& [_, t] : trajectories)
        in.push_back(&t);
    std::vector<SpeedFilterResult> results(in.size());
    parallel_for(in.size(), workers, [&](std::size_t i) { results[i] = speed_filter(*in[i], max_speed_kmh); });

    SpeedFilterSummary summary;
    for (auto& r : results) {
        summary.removed += r.removed;
        if (!r.trajectory.events.empty())
            summary.trajectories.emplace(r.trajectory.user_id, std::move(r.trajectory));
    }
    return summary;
}

std::size_t coverage_cutoff(std::span<const std::int64_t> ranked_weights, double coverage)
{
    if (!(coverage > 0.0 && coverage <= 1.0))
        throw DataError("source coverage must lie in (0, 1]");
    const std::int64_t total = std::accumulate(ranked_weights.begin(), ranked_weights.end(), std::int64_t{0});
    const double threshold = coverage * static_cast<double>(total);
    std::int64_t cumulative = 0;
    for (std::size_t i = 0; i < ranked_weights.size(); ++i) {
        cumulative += ranked_weights[i];
        if (static_cast<double>(cumulative) >= threshold)
            return i + 1;
    }
    return ranked_weights.size();
}

SourceFilterResult source_popularity_filter(std::span<const GeoEvent> events, const SourceFilterOptions& options)
{
    struct Tally {
        std::unordered_set<std::string> users;
        std::int64_t events = 0;
    };
    // country -> source -> tally
    std::map<std::string, std::map<std::string, Tally>> tallies;
    std::unordered_set<std::string> users_before;

    SourceFilterResult result;
    for (const auto& ev : events) {
        if (!ev.country) {
            ++result.stats.unlabeled_events;
            continue;
        }
        auto& t = tallies[*ev.country][ev.source];
        t.users.insert(ev.user_id);
        ++t.events;
        users_before.insert(ev.user_id);
        ++result.stats.events_before;
    }
    result.stats.users_before = users_before.size();

    for (auto& [country, sources] : tallies) {
        std::vector<SourceRank> ranking;
        for (auto& [name, tally] : sources)
            ranking.push_back({name, static_cast<std::int64_t>(tally.users.size()), tally.events, false});
        const bool by_users = options.weight == PopularityWeight::Users;
        auto weight = [by_users](const SourceRank& r) { return by_users ? r.users : r.events; };
        std::stable_sort(ranking.begin(), ranking.end(), [&](const SourceRank& a, const SourceRank& b) {
            if (weight(a) != weight(b))
                return weight(a) > weight(b);
            return a.source < b.source;
        });
        std::vector<std::int64_t> weights;
        for (const auto& r : ranking)
            weights.push_back(weight(r));
        const std::size_t keep = coverage_cutoff(weights, options.coverage);
        auto& retained = result.retained[country];
        for (std::size_t i = 0; i < keep; ++i) {
            ranking[i].retained = true;
            retained.insert(ranking[i].source);
        }
        result.rankings.emplace(country, std::move(ranking));
    }

    result.events = apply_source_filter(events, result.retained);
    std::unordered_set<std::string> users_after;
    for (const auto& ev : result.events)
        users_after.insert(ev.user_id);
    result.stats.users_after = users_after.size();
    result.stats.events_after = result.events.size();
    return result;
}

std::vector<GeoEvent> apply_source_filter(std::span<const GeoEvent> events, const RetainedSources& retained)
{
    std::vector<GeoEvent> out;
    for (const auto& ev : events) {
        if (!ev.country)
            continue;
        auto it = retained.find(*ev.country);
        if (it != retained.end() && it->second.count(ev.source))
            out.push_back(ev);
    }
    return out;
}

} // namespace geoflow
