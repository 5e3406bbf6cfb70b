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
#include "geoflow/metrics.hpp"
#include "geoflow/error.hpp"
#include "geoflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace geoflow
{

bool is_mobile(const UserProfile& profile)
{
    return profile.distinct_countries >= 2;
}

std::optional<double> mobility_rate(const std::string& country, const ProfileMap& profiles)
{
    std::int64_t residents = 0;
    std::int64_t mobile = 0;
    for (const auto& [_, p] : profiles) {
        if (p.residence != country)
            continue;
        ++residents;
        mobile += is_mobile(p) ? 1 : 0;
    }
    if (residents == 0)
        return std::nullopt;
    return static_cast<double>(mobile) / static_cast<double>(residents);
}

int destination_diversity(const std::string& country, const ProfileMap& profiles)
{
    std::set<std::string> visited;
    for (const auto& [_, p] : profiles) {
        if (p.residence != country)
            continue;
        for (const auto& [c, _n] : p.counts)
            if (c != country)
                visited.insert(c);
    }
    return static_cast<int>(visited.size());
}

std::optional<LatLon> center_of_mass(std::span<const LatLon> points)
{
    if (points.empty())
        throw DataError("center_of_mass: no points");
    Vec3 sum{0.0, 0.0, 0.0};
    for (const auto& p : points) {
        const auto v = to_unit_vector(p);
        for (int k = 0; k < 3; ++k)
            sum[k] += v[k];
    }
    const double n = static_cast<double>(points.size());
    for (auto& s : sum)
        s /= n;
    if (std::sqrt(sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]) < 1e-12)
        return std::nullopt;
    return from_vector(sum);
}

double radius_of_gyration(std::span<const LatLon> points)
{
    if (points.empty())
        throw DataError("radius_of_gyration: no points");
    if (std::all_of(points.begin(), points.end(), [&](const LatLon& p) { return p == points.front(); }))
        return 0.0;
    const LatLon cm = center_of_mass(points).value_or(points.front());
    double sq = 0.0;
    for (const auto& p : points) {
        const double d = haversine_km(p, cm);
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(points.size()));
}

std::vector<double> displacements(const Trajectory& trajectory)
{
    std::vector<double> out;
    for (std::size_t i = 1; i < trajectory.events.size(); ++i)
        out.push_back(haversine_km(trajectory.events[i - 1].position(), trajectory.events[i].position()));
    return out;
}

std::vector<UserMetrics> compute_user_metrics(const ProfileMap& profiles, const TrajectoryMap& trajectories,
                                              unsigned workers)
{
    std::vector<const UserProfile*> in;
    for (const auto& [_, p] : profiles)
        in.push_back(&p);
    std::vector<UserMetrics> out(in.size());
    parallel_for(in.size(), workers, [&](std::size_t i) {
        const auto& p = *in[i];
        auto& m = out[i];
        m.user_id = p.user_id;
        m.residence = p.residence;
        m.n_events = p.total_events;
        m.distinct_countries = p.distinct_countries;
        m.mobile = is_mobile(p);
        auto it = trajectories.find(p.user_id);
        if (it != trajectories.end() && !it->second.events.empty()) {
            std::vector<LatLon> pts;
            pts.reserve(it->second.events.size());
            for (const auto& ev : it->second.events)
                pts.push_back(ev.position());
            m.radius_km = radius_of_gyration(pts);
        }
    });
    return out;
}

std::vector<MobilityProfile> mobility_profiles(const ProfileMap& profiles, std::span<const UserMetrics> users,
                                               RadiusPopulation radius_over)
{
    struct Acc {
        MobilityProfile row;
        double radius_sum = 0.0;
        std::int64_t radius_n = 0;
        std::set<std::string> visited;
    };
    std::map<std::string, Acc> acc;
    for (const auto& u : users) {
        auto& a = acc[u.residence];
        a.row.country = u.residence;
        ++a.row.n_residents;
        a.row.n_mobile += u.mobile ? 1 : 0;
        if (radius_over == RadiusPopulation::AllResidents || u.mobile) {
            a.radius_sum += u.radius_km;
            ++a.radius_n;
        }
        auto it = profiles.find(u.user_id);
        if (it != profiles.end())
            for (const auto& [c, _n] : it->second.counts)
                if (c != u.residence)
                    a.visited.insert(c);
    }
    std::vector<MobilityProfile> out;
    for (auto& [_, a] : acc) {
        a.row.mobility_rate = static_cast<double>(a.row.n_mobile) / static_cast<double>(a.row.n_residents);
        a.row.mean_radius_km = a.radius_n ? a.radius_sum / static_cast<double>(a.radius_n) : 0.0;
        a.row.countries_visited = static_cast<int>(a.visited.size());
        out.push_back(a.row);
    }
    return out;
}

std::int64_t days_from_civil(int year, unsigned month, unsigned day)
{
    // H. Hinnant's days_from_civil
    const std::int64_t y = static_cast<std::int64_t>(year) - (month <= 2 ? 1 : 0);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t mp = (static_cast<std::int64_t>(month) + 9) % 12;
    const std::int64_t doy = (153 * mp + 2) / 5 + day - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

int days_in_year(int year)
{
    return static_cast<int>(days_from_civil(year + 1, 1, 1) - days_from_civil(year, 1, 1));
}

std::vector<double> normalize_series(std::span<const std::int64_t> values)
{
    std::vector<double> out(values.size(), 0.0);
    const auto max_it = std::max_element(values.begin(), values.end());
    if (max_it == values.end() || *max_it <= 0)
        return out;
    const double max = static_cast<double>(*max_it);
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = values[i] == *max_it ? 100.0 : 100.0 * static_cast<double>(values[i]) / max;
    return out;
}

namespace
{

struct DayWindow {
    std::int64_t start;
    int days;

    std::optional<int> day_of(std::int64_t ts) const
    {
        const std::int64_t d = (ts >= start ? ts - start : ts - start - 86399) / 86400;
        if (d < 0 || d >= days)
            return std::nullopt;
        return static_cast<int>(d);
    }
};

DayWindow window_for(int year)
{
    return {days_from_civil(year, 1, 1) * 86400, days_in_year(year)};
}

DailySeries make_series(std::string country, Direction dir, int days)
{
    DailySeries s;
    s.country = std::move(country);
    s.direction = dir;
    s.values.assign(days, 0);
    return s;
}

} // namespace

std::map<std::string, DailySeries> daily_abroad_series(const ProfileMap& profiles,
                                                       const TrajectoryMap& trajectories, Direction direction,
                                                       int year)
{
    const auto window = window_for(year);
    std::map<std::string, DailySeries> out;
    for (const auto& [_, p] : profiles) {
        if (direction == Direction::Outbound) {
            out.try_emplace(p.residence, make_series(p.residence, direction, window.days));
        }
        else {
            for (const auto& [c, _n] : p.counts)
                out.try_emplace(c, make_series(c, direction, window.days));
        }
    }

    for (const auto& [user, p] : profiles) {
        auto it = trajectories.find(user);
        if (it == trajectories.end())
            continue;
        // (series key, day) pairs this user contributes to, each at most once
        std::set<std::pair<std::string, int>> hits;
        for (const auto& ev : it->second.events) {
            if (!ev.country || *ev.country == p.residence)
                continue;
            auto day = window.day_of(ev.timestamp);
            if (!day)
                continue;
            hits.emplace(direction == Direction::Outbound ? p.residence : *ev.country, *day);
        }
        for (const auto& [key, day] : hits)
            ++out.at(key).values[day];
    }
    for (auto& [_, s] : out)
        s.normalized = normalize_series(s.values);
    return out;
}

DailySeries global_abroad_series(const ProfileMap& profiles, const TrajectoryMap& trajectories, int year)
{
    const auto window = window_for(year);
    auto series = make_series("*", Direction::Outbound, window.days);
    for (const auto& [user, p] : profiles) {
        auto it = trajectories.find(user);
        if (it == trajectories.end())
            continue;
        std::set<int> days;
        for (const auto& ev : it->second.events)
            if (ev.country && *ev.country != p.residence)
                if (auto day = window.day_of(ev.timestamp))
                    days.insert(*day);
        for (int d : days)
            ++series.values[d];
    }
    series.normalized = normalize_series(series.values);
    return series;
}

} // namespace geoflow
