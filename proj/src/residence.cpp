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
#include "geoflow/residence.hpp"
#include "geoflow/csv.hpp"
#include "geoflow/error.hpp"
#include "geoflow/parallel.hpp"

#include <limits>

#include <fmt/format.h>

namespace geoflow
{

std::string assign_residence(const std::map<std::string, std::int64_t>& counts,
                             const std::map<std::string, std::int64_t>& first_seen)
{
    if (counts.empty())
        throw DataError("assign_residence: no country counts");
    auto seen = [&](const std::string& c) {
        auto it = first_seen.find(c);
        return it == first_seen.end() ? std::numeric_limits<std::int64_t>::max() : it->second;
    };
    // map iteration is in code order, so strict comparisons keep the smallest code on full ties
    auto best = counts.begin();
    for (auto it = std::next(counts.begin()); it != counts.end(); ++it) {
        if (it->second > best->second || (it->second == best->second && seen(it->first) < seen(best->first)))
            best = it;
    }
    return best->first;
}

std::optional<UserProfile> build_profile(const Trajectory& trajectory)
{
    UserProfile p;
    p.user_id = trajectory.user_id;
    for (const auto& ev : trajectory.events) {
        if (!ev.country)
            continue;
        ++p.counts[*ev.country];
        auto [it, inserted] = p.first_seen.emplace(*ev.country, ev.timestamp);
        if (!inserted && ev.timestamp < it->second)
            it->second = ev.timestamp;
        ++p.total_events;
    }
    if (p.counts.empty())
        return std::nullopt;
    p.distinct_countries = static_cast<int>(p.counts.size());
    p.residence = assign_residence(p.counts, p.first_seen);
    return p;
}

ProfileMap build_profiles(const TrajectoryMap& trajectories, unsigned workers)
{
    std::vector<const Trajectory*> in;
    for (const auto& [_, t] : trajectories)
        in.push_back(&t);
    std::vector<std::optional<UserProfile>> out(in.size());
    parallel_for(in.size(), workers, [&](std::size_t i) { out[i] = build_profile(*in[i]); });
    ProfileMap profiles;
    for (auto& p : out)
        if (p)
            profiles.emplace(p->user_id, std::move(*p));
    return profiles;
}

Census read_census(const std::filesystem::path& path)
{
    const auto table = read_csv_table(path);
    const auto c_code = table.column("code");
    const auto c_pop = table.column("population");
    const auto c_gdp = table.find_column("gdp_per_capita");
    Census census;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto& code = row[c_code];
        if (!is_country_code(code))
            throw DataError(fmt::format("{}: row {}: invalid code '{}'", path.string(), r + 2, code));
        CensusEntry e;
        auto pop = parse_int(row[c_pop]);
        if (!pop) {
            // tolerate populations written as floating point, e.g. 1.2e7
            auto d = parse_double(row[c_pop]);
            if (!d)
                throw DataError(fmt::format("{}: row {}: bad population", path.string(), r + 2));
            pop = static_cast<std::int64_t>(*d);
        }
        e.population = *pop;
        if (c_gdp && !row[*c_gdp].empty()) {
            e.gdp_per_capita = parse_double(row[*c_gdp]);
            if (!e.gdp_per_capita)
                throw DataError(fmt::format("{}: row {}: bad gdp_per_capita", path.string(), r + 2));
        }
        if (!census.emplace(code, e).second)
            throw DataError(fmt::format("{}: duplicate code '{}'", path.string(), code));
    }
    return census;
}

CountryStatsMap compute_country_stats(const ProfileMap& profiles, const Census& census,
                                      const ResidenceThresholds& thresholds)
{
    CountryStatsMap stats;
    for (const auto& [_, p] : profiles) {
        auto& s = stats[p.residence];
        s.code = p.residence;
        ++s.residents;
    }
    for (const auto& [code, entry] : census) {
        auto& s = stats[code];
        s.code = code;
        s.population = entry.population;
        s.gdp_per_capita = entry.gdp_per_capita;
    }
    for (auto& [code, s] : stats) {
        if (!s.population) {
            s.reason = "no census";
            continue;
        }
        if (*s.population <= 0) {
            s.reason = "population <= 0";
            continue;
        }
        s.penetration = static_cast<double>(s.residents) / static_cast<double>(*s.population);
        if (s.penetration < thresholds.min_penetration)
            s.reason = "penetration below threshold";
        else if (s.residents < thresholds.min_residents)
            s.reason = "too few residents";
        else
            s.included = true;
    }
    return stats;
}

} // namespace geoflow
