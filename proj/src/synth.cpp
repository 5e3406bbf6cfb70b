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
#include "geoflow/synth.hpp"
#include "geoflow/csv.hpp"
#include "geoflow/error.hpp"
#include "geoflow/metrics.hpp"
#include "geoflow/parallel.hpp"
#include "geoflow/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

namespace geoflow
{

namespace
{

// stream keys for derive_seed
constexpr std::uint64_t kWorldKey = 1;
constexpr std::uint64_t kUserKey = 2;
constexpr std::uint64_t kLevyKey = 3;

const std::vector<std::string> kSources = {"android", "iphone", "web"};
const std::vector<double> kSourceCumulative = {0.5, 0.85, 1.0};

constexpr std::int64_t kHour = 3600;
// consecutive events in different countries are at least a day apart, which
// keeps any great-circle hop under the default speed limit
constexpr std::int64_t kTransitionGap = 24 * kHour;

std::vector<double> cumulative(const std::vector<double>& w)
{
    std::vector<double> c(w.size());
    std::partial_sum(w.begin(), w.end(), c.begin());
    return c;
}

LatLon jitter(Rng& rng, const LatLon& centre, double sigma_km, double radius_km)
{
    double east, north, d;
    do {
        east = sigma_km * rng.normal();
        north = sigma_km * rng.normal();
        d = std::hypot(east, north);
    } while (d > radius_km);
    const double bearing = std::atan2(east, north) * 180.0 / kPi;
    return destination_point(centre, bearing, d);
}

std::int64_t year_start(int year)
{
    return days_from_civil(year, 1, 1) * 86400;
}

std::size_t nearest_capital(const SynthWorld& world, const LatLon& p)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < world.countries.size(); ++i) {
        const double d = haversine_km(p, world.countries[i].capital);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

} // namespace

std::int64_t SynthWorld::users(std::size_t i) const
{
    const auto& c = countries.at(i);
    return std::max<std::int64_t>(1, std::llround(c.penetration * c.population));
}

std::string synth_code(std::size_t i)
{
    if (i >= 26 * 26)
        throw DataError("synth_code: at most 676 countries");
    return {static_cast<char>('A' + i / 26), static_cast<char>('A' + i % 26)};
}

SynthWorld make_world(std::uint64_t seed, const WorldOptions& options)
{
    if (options.countries < 2 || options.blocks < 1 || options.blocks > options.countries)
        throw DataError("make_world: need at least 2 countries and 1 <= blocks <= countries");
    if (!(options.pop_min > 0.0) || options.pop_max < options.pop_min)
        throw DataError("make_world: need 0 < pop_min <= pop_max");
    Rng rng(derive_seed(seed, kWorldKey));
    SynthWorld world;
    world.seed = seed;
    world.gravity = options.gravity;
    world.block_boost = options.block_boost;

    const double sin_max = std::sin(options.max_abs_lat * kPi / 180.0);
    for (int i = 0; i < options.countries; ++i) {
        SynthCountry c;
        c.code = synth_code(static_cast<std::size_t>(i));
        c.population = std::round(options.pop_min * std::pow(options.pop_max / options.pop_min, rng.uniform()));
        const double spread = 1.0 + options.penetration_jitter * (2.0 * rng.uniform() - 1.0);
        c.penetration = std::min(1.0, options.users_per_country * spread / c.population);
        bool placed = false;
        for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
            // uniform on the sphere within the latitude band
            const LatLon p{std::asin(sin_max * (2.0 * rng.uniform() - 1.0)) * 180.0 / kPi,
                           normalize_lon(rng.uniform(-180.0, 180.0))};
            placed = std::all_of(world.countries.begin(), world.countries.end(), [&](const SynthCountry& o) {
                return haversine_km(p, o.capital) >= options.min_separation_km;
            });
            if (placed)
                c.capital = p;
        }
        if (!placed)
            throw DataError("make_world: cannot place capitals with the requested separation");
        world.countries.push_back(std::move(c));
    }
    std::vector<int> order(static_cast<std::size_t>(options.countries));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t k = 0; k < order.size(); ++k)
        world.countries[static_cast<std::size_t>(order[k])].block = static_cast<int>(k) % options.blocks;
    validate_world(world);
    return world;
}

void validate_world(const SynthWorld& world)
{
    if (!(world.block_boost >= 1.0))
        throw DataError("synth world: block_boost must be >= 1");
    for (const auto& c : world.countries) {
        if (!(c.population > 0.0))
            throw DataError(fmt::format("synth world: population of {} must be positive", c.code));
        if (!(c.penetration > 0.0 && c.penetration <= 1.0))
            throw DataError(fmt::format("synth world: penetration of {} must be in (0, 1]", c.code));
    }
}

std::vector<std::vector<double>> expected_flows(const SynthWorld& world)
{
    const auto& cs = world.countries;
    const auto& g = world.gravity;
    std::vector<std::vector<double>> f(cs.size(), std::vector<double>(cs.size(), 0.0));
    for (std::size_t i = 0; i < cs.size(); ++i) {
        for (std::size_t j = 0; j < cs.size(); ++j) {
            if (i == j)
                continue;
            const double r = haversine_km(cs[i].capital, cs[j].capital);
            if (r < 1.0)
                throw DataError(fmt::format("expected_flows: capitals of {} and {} are closer than 1 km", cs[i].code,
                                            cs[j].code));
            f[i][j] = g.a * std::pow(cs[i].population, g.alpha) * std::pow(cs[j].population, g.beta) /
                      std::pow(r, g.gamma);
            if (cs[i].block == cs[j].block)
                f[i][j] *= world.block_boost;
        }
    }
    return f;
}

std::vector<double> country_trip_rates(const SynthWorld& world, double max_rate)
{
    if (!(max_rate >= 0.0 && max_rate <= 1.0))
        throw DataError("trip_rate must be in [0, 1]");
    const auto f = expected_flows(world);
    std::vector<double> per_capita(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        per_capita[i] = exact_sum(f[i]) / world.countries[i].population;
    const double top = per_capita.empty() ? 0.0 : *std::max_element(per_capita.begin(), per_capita.end());
    std::vector<double> rates(f.size(), 0.0);
    if (top > 0.0)
        for (std::size_t i = 0; i < f.size(); ++i)
            rates[i] = max_rate * per_capita[i] / top;
    return rates;
}

SynthOutput generate_events(const SynthWorld& world, const EventOptions& options)
{
    validate_world(world);
    if (options.events_per_user < 1)
        throw DataError("events_per_user must be >= 1");
    const auto flows = expected_flows(world);
    SynthOutput out;
    out.trip_rates = country_trip_rates(world, options.trip_rate);
    std::vector<std::vector<double>> rows;
    for (const auto& row : flows)
        rows.push_back(cumulative(row));

    std::vector<std::size_t> home_of;
    for (std::size_t i = 0; i < world.countries.size(); ++i)
        for (std::int64_t k = 0; k < world.users(i); ++k)
            home_of.push_back(i);

    const std::int64_t start = year_start(options.year);
    const std::int64_t year_len = std::int64_t{days_in_year(options.year)} * 86400;
    const std::uint64_t user_seed = derive_seed(world.seed, kUserKey);

    std::vector<std::vector<GeoEvent>> per_user(home_of.size());
    out.users.resize(home_of.size());
    parallel_for(home_of.size(), options.workers, [&](std::size_t u) {
        Rng rng(derive_seed(user_seed, u));
        const std::size_t home = home_of[u];
        SynthUser& user = out.users[u];
        user.user_id = fmt::format("u{:07d}", u);
        user.residence = world.countries[home].code;
        const std::string& source = kSources[rng.categorical(kSourceCumulative)];

        const bool travels = rng.bernoulli(out.trip_rates[home]) && rows[home].back() > 0.0;
        std::size_t dest = home;
        if (travels) {
            dest = rng.categorical(rows[home]);
            user.destination = world.countries[dest].code;
        }
        const int n = options.events_per_user;
        int total = n / 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n) + 1));
        total = std::max(total, travels ? 3 : 1);
        // foreign events stay below half of the total so home is the strict majority
        const int foreign = travels ? 1 + static_cast<int>(rng.below(std::max(1, (total - 1) / 4))) : 0;
        const int home_events = total - foreign;
        user.foreign_events = foreign;
        const int trip_at = static_cast<int>(rng.below(static_cast<std::uint64_t>(home_events) + 1));

        std::vector<std::size_t> where;
        for (int k = 0; k < home_events; ++k) {
            if (k == trip_at)
                where.insert(where.end(), static_cast<std::size_t>(foreign), dest);
            where.push_back(home);
        }
        if (trip_at == home_events)
            where.insert(where.end(), static_cast<std::size_t>(foreign), dest);

        std::vector<std::int64_t> gap(where.size(), 0);
        std::int64_t fixed = 0;
        for (std::size_t k = 1; k < where.size(); ++k) {
            gap[k] = where[k] == where[k - 1] ? kHour : kTransitionGap;
            fixed += gap[k];
        }
        const std::int64_t slack = year_len - 1 - fixed;
        if (slack < 0)
            throw DataError("generate_events: too many events to fit in one year");
        std::vector<double> w(where.size());
        for (auto& x : w)
            x = -std::log1p(-rng.uniform());
        const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
        std::int64_t remaining = slack;

        auto& events = per_user[u];
        std::int64_t t = start;
        for (std::size_t k = 0; k < where.size(); ++k) {
            const auto extra = std::min(remaining, static_cast<std::int64_t>(std::floor(slack * (w[k] / wsum))));
            remaining -= extra;
            t += gap[k] + extra;
            const auto& c = world.countries[where[k]];
            const LatLon p = jitter(rng, c.capital, options.jitter_sigma_km, options.home_radius_km);
            events.push_back({user.user_id, t, p.lat, p.lon, source, c.code});
        }
    });
    for (auto& ev : per_user)
        out.events.insert(out.events.end(), std::make_move_iterator(ev.begin()), std::make_move_iterator(ev.end()));
    return out;
}

std::vector<GeoEvent> generate_levy_events(const SynthWorld& world, const LevyOptions& options)
{
    if (world.countries.empty())
        throw DataError("generate_levy_events: empty world");
    const std::uint64_t levy_seed = derive_seed(world.seed, kLevyKey);
    const auto users = static_cast<std::size_t>(std::max(0, options.users));
    std::vector<std::vector<GeoEvent>> per_user(users);
    parallel_for(users, 1, [&](std::size_t u) {
        Rng rng(derive_seed(levy_seed, u));
        const std::string id = fmt::format("w{:07d}", u);
        LatLon p = world.countries[rng.below(world.countries.size())].capital;
        std::int64_t t = year_start(options.year) + static_cast<std::int64_t>(rng.below(86400));
        auto& events = per_user[u];
        for (int k = 0; k < options.events_per_user; ++k) {
            if (k > 0) {
                const double d = power_law_quantile(rng.uniform(), options.exponent, options.xmin_km, options.xmax_km);
                p = destination_point(p, rng.uniform(0.0, 360.0), d);
                const auto travel = static_cast<std::int64_t>(std::ceil(d / options.max_speed_kmh * 3600.0));
                t += std::max(kHour, travel) + static_cast<std::int64_t>(rng.below(kHour));
            }
            events.push_back({id, t, p.lat, p.lon, "levy", world.countries[nearest_capital(world, p)].code});
        }
    });
    std::vector<GeoEvent> out;
    for (auto& ev : per_user)
        out.insert(out.end(), std::make_move_iterator(ev.begin()), std::make_move_iterator(ev.end()));
    return out;
}

double power_law_quantile(double u, double exponent, double xmin, double xmax)
{
    if (!(exponent > 1.0) || !(xmin > 0.0) || !(xmax > xmin))
        throw DataError("power_law_quantile: need exponent > 1 and 0 < xmin < xmax");
    const double a = 1.0 - exponent;
    const double tail = std::pow(xmax / xmin, a);
    return xmin * std::pow(1.0 - u * (1.0 - tail), 1.0 / a);
}

std::vector<double> sample_power_law(std::uint64_t seed, double exponent, double xmin, double xmax, std::size_t n)
{
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out)
        x = power_law_quantile(rng.uniform(), exponent, xmin, xmax);
    return out;
}

void write_truth(const SynthWorld& world, const SynthOutput& output, const std::filesystem::path& dir)
{
    const auto& cs = world.countries;
    {
        auto out = open_output(dir / "census.csv");
        out << "code,population\n";
        for (const auto& c : cs)
            out << c.code << ',' << format_number(c.population) << '\n';
    }
    {
        auto out = open_output(dir / "capitals.csv");
        out << "code,lat,lon\n";
        for (const auto& c : cs)
            out << c.code << ',' << format_number(c.capital.lat) << ',' << format_number(c.capital.lon) << '\n';
    }
    {
        auto out = open_output(dir / "truth_blocks.csv");
        out << "code,block\n";
        for (const auto& c : cs)
            out << c.code << ',' << c.block << '\n';
    }
    {
        auto out = open_output(dir / "truth_countries.csv");
        out << "code,population,lat,lon,penetration,block,users,trip_rate\n";
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const auto& c = cs[i];
            const double rate = i < output.trip_rates.size() ? output.trip_rates[i] : 0.0;
            out << join_csv({c.code, format_number(c.population), format_number(c.capital.lat),
                             format_number(c.capital.lon), format_number(c.penetration), std::to_string(c.block),
                             std::to_string(world.users(i)), format_number(rate)})
                << '\n';
        }
    }
    {
        auto out = open_output(dir / "truth_residences.csv");
        out << "user_id,residence,destination,foreign_events\n";
        for (const auto& u : output.users)
            out << join_csv({u.user_id, u.residence, u.destination, std::to_string(u.foreign_events)}) << '\n';
    }
    {
        nlohmann::ordered_json j;
        j["seed"] = world.seed;
        j["a"] = world.gravity.a;
        j["alpha"] = world.gravity.alpha;
        j["beta"] = world.gravity.beta;
        j["gamma"] = world.gravity.gamma;
        j["block_boost"] = world.block_boost;
        auto out = open_output(dir / "truth_gravity.json");
        out << j.dump(2) << '\n';
    }
}

} // namespace geoflow
