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
#include "geoflow/error.hpp"
#include "geoflow/geo.hpp"
#include "geoflow/ingest.hpp"
#include "geoflow/network.hpp"
#include "geoflow/residence.hpp"
#include "geoflow/synth.hpp"

#include <cmath>
#include <set>

#include <doctest.h>

using namespace geoflow;

namespace
{

constexpr double kDegKm = M_PI * 6371.0088 / 180.0;

SynthWorld pair_world(double p0, double p1, double km)
{
    SynthWorld w;
    w.countries = {{"AA", p0, {0, 0}, 0.01, 0}, {"BB", p1, {0, km / kDegKm}, 0.01, 1}};
    w.gravity = {1, 1, 1, 1};
    return w;
}

} // namespace

TEST_CASE("country codes")
{
    CHECK(synth_code(0) == "AA");
    CHECK(synth_code(1) == "AB");
    CHECK(synth_code(26) == "BA");
    CHECK(synth_code(675) == "ZZ");
    CHECK_THROWS(synth_code(676));
}

TEST_CASE("expected flows evaluate the gravity law")
{
    const auto w = pair_world(1000, 1000, 1000);
    auto f = expected_flows(w);
    CHECK(f[0][0] == 0.0);
    CHECK(f[0][1] == doctest::Approx(1000).epsilon(1e-12));
    CHECK(f[1][0] == doctest::Approx(1000).epsilon(1e-12));

    auto doubled = w;
    doubled.countries[0].population = 2000;
    doubled.gravity.beta = 0.5;
    const auto g = expected_flows(doubled);
    const auto base = expected_flows([&] {
        auto b = w;
        b.gravity.beta = 0.5;
        return b;
    }());
    CHECK(g[0][1] == doctest::Approx(2 * base[0][1]).epsilon(1e-12));

    auto boosted = w;
    boosted.block_boost = 10;
    CHECK(expected_flows(boosted)[0][1] == doctest::Approx(f[0][1]));
    boosted.countries[1].block = 0;
    CHECK(expected_flows(boosted)[0][1] == doctest::Approx(10 * f[0][1]));

    auto coincident = w;
    coincident.countries[1].capital = coincident.countries[0].capital;
    CHECK_THROWS_AS(expected_flows(coincident), DataError);
}

TEST_CASE("world validation")
{
    auto w = pair_world(1000, 1000, 1000);
    CHECK_NOTHROW(validate_world(w));
    auto bad = w;
    bad.countries[0].population = 0;
    CHECK_THROWS_AS(validate_world(bad), DataError);
    bad = w;
    bad.block_boost = 0.5;
    CHECK_THROWS_AS(validate_world(bad), DataError);
    bad = w;
    bad.countries[1].penetration = 1.5;
    CHECK_THROWS_AS(validate_world(bad), DataError);
}

TEST_CASE("make_world respects its options")
{
    WorldOptions o;
    o.countries = 20;
    o.blocks = 4;
    o.min_separation_km = 500;
    o.users_per_country = 300;
    const auto w = make_world(31, o);
    REQUIRE(w.countries.size() == 20);
    std::set<int> blocks;
    for (std::size_t i = 0; i < w.countries.size(); ++i) {
        const auto& c = w.countries[i];
        CHECK(c.code == synth_code(i));
        CHECK(c.population >= o.pop_min);
        CHECK(c.population <= o.pop_max);
        CHECK(c.penetration > 0);
        CHECK(c.penetration <= 1);
        CHECK(std::abs(c.capital.lat) <= o.max_abs_lat);
        CHECK(w.users(i) == std::llround(c.penetration * c.population));
        CHECK(double(w.users(i)) >= 300 * (1 - o.penetration_jitter) - 1);
        CHECK(double(w.users(i)) <= 300 * (1 + o.penetration_jitter) + 1);
        blocks.insert(c.block);
        for (std::size_t j = 0; j < i; ++j)
            CHECK(haversine_km(c.capital, w.countries[j].capital) >= 500);
    }
    CHECK(blocks.size() == 4);
    const auto again = make_world(31, o);
    CHECK(again.countries[7].capital == w.countries[7].capital);
    CHECK(make_world(32, o).countries[7].capital != w.countries[7].capital);
}

TEST_CASE("trip rates scale with per-capita outflow")
{
    const auto w = make_world(33, {});
    const auto rates = country_trip_rates(w, 0.4);
    const auto f = expected_flows(w);
    double top = 0;
    for (double r : rates)
        top = std::max(top, r);
    CHECK(top == doctest::Approx(0.4));
    for (std::size_t i = 1; i < rates.size(); ++i) {
        double fi = 0, f0 = 0;
        for (double x : f[i])
            fi += x;
        for (double x : f[0])
            f0 += x;
        CHECK(rates[i] / rates[0] ==
              doctest::Approx((fi / w.countries[i].population) / (f0 / w.countries[0].population)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(country_trip_rates(w, 1.5), DataError);
}

TEST_CASE("power-law sampler")
{
    CHECK(power_law_quantile(0.0, 1.62, 1, 1e4) == doctest::Approx(1.0));
    CHECK(power_law_quantile(1.0 - 1e-15, 1.62, 1, 1e4) == doctest::Approx(1e4).epsilon(1e-6));
    CHECK(power_law_quantile(0.999999, 1.62, 1, 1e4) < 1e4);
    CHECK_THROWS_AS(power_law_quantile(0.5, 1.0, 1, 10), DataError);

    const auto x = sample_power_law(34, 2.5, 2, 200, 20000);
    CHECK(x == sample_power_law(34, 2.5, 2, 200, 20000));
    // empirical CDF against the analytic one at a few points
    for (double q : {3.0, 10.0, 50.0}) {
        const double cdf = (1 - std::pow(q / 2, -1.5)) / (1 - std::pow(100.0, -1.5));
        const double frac = double(std::count_if(x.begin(), x.end(), [&](double v) { return v <= q; })) / 20000;
        CHECK(std::abs(frac - cdf) <= 4 * std::sqrt(cdf * (1 - cdf) / 20000));
    }
    for (double v : x) {
        CHECK(v >= 2);
        CHECK(v <= 200);
    }
}

TEST_CASE("generated events follow the construction rules")
{
    WorldOptions wo;
    wo.countries = 5;
    wo.users_per_country = 40;
    const auto w = make_world(35, wo);
    EventOptions eo;
    eo.events_per_user = 20;
    eo.trip_rate = 0.8;
    const auto out = generate_events(w, eo);
    CHECK(out.trip_rates.size() == 5);
    const auto traj = build_trajectories(out.events);
    CHECK(traj.size() == out.users.size());
    std::map<std::string, LatLon> capital;
    for (const auto& c : w.countries)
        capital[c.code] = c.capital;
    const std::int64_t y0 = 1325376000, y1 = y0 + 366 * 86400;
    for (const auto& u : out.users) {
        const auto& ev = traj.at(u.user_id).events;
        std::map<std::string, int> counts;
        for (std::size_t k = 0; k < ev.size(); ++k) {
            if (k)
                CHECK(ev[k].timestamp > ev[k - 1].timestamp);
            CHECK(ev[k].timestamp >= y0);
            CHECK(ev[k].timestamp < y1);
            CHECK(haversine_km(ev[k].position(), capital.at(*ev[k].country)) <= 50.0);
            ++counts[*ev[k].country];
        }
        int foreign = 0;
        for (const auto& [c, n] : counts)
            if (c != u.residence) {
                foreign += n;
                CHECK(n < counts[u.residence]);
            }
        CHECK(foreign == u.foreign_events);
        CHECK(counts.size() == (u.destination.empty() ? 1u : 2u));
        CHECK(build_profile(traj.at(u.user_id))->residence == u.residence);
    }
}

TEST_CASE("generation is deterministic and worker independent")
{
    WorldOptions wo;
    wo.users_per_country = 30;
    const auto w = make_world(36, wo);
    EventOptions eo;
    eo.events_per_user = 10;
    const auto a = generate_events(w, eo);
    eo.workers = 4;
    const auto b = generate_events(w, eo);
    CHECK(a.events == b.events);
    const auto c = generate_events(make_world(37, wo), eo);
    CHECK(a.events != c.events);
}

TEST_CASE("trip_rate 0 yields no foreign events")
{
    WorldOptions wo;
    wo.users_per_country = 30;
    EventOptions eo;
    eo.trip_rate = 0;
    eo.events_per_user = 6;
    const auto out = generate_events(make_world(38, wo), eo);
    for (const auto& u : out.users) {
        CHECK(u.destination.empty());
        CHECK(u.foreign_events == 0);
    }
    const auto profiles = build_profiles(build_trajectories(out.events));
    const auto net = build_flow_network(profiles);
    CHECK(net.edges.empty());
}

namespace
{

// Standardised deviations of per-country traveller counts and of per-edge
// distinct-user counts from their binomial expectations.
struct Deviations {
    std::vector<double> travel;
    std::vector<double> cells;
    std::size_t users = 0;
};

Deviations flow_deviations(std::uint64_t seed, double users_per_country, int events_per_user)
{
    WorldOptions wo;
    wo.countries = 6;
    wo.blocks = 2;
    wo.users_per_country = users_per_country;
    wo.gravity = {1, 0.89, 0.69, 1.1};
    const auto w = make_world(seed, wo);
    EventOptions eo;
    eo.events_per_user = events_per_user;
    eo.trip_rate = 1.0;
    const auto out = generate_events(w, eo);
    const auto net = build_flow_network(build_profiles(build_trajectories(out.events)));
    const auto f = expected_flows(w);
    Deviations d;
    d.users = out.users.size();
    for (std::size_t i = 0; i < w.countries.size(); ++i) {
        const auto* node = net.find_node(w.countries[i].code);
        REQUIRE(node);
        // each traveller visits exactly one destination
        const double n = double(node->mobile_residents);
        const double residents = double(node->residents);
        const double p_travel = out.trip_rates[i];
        if (p_travel < 1.0)
            d.travel.push_back((n - residents * p_travel) / std::sqrt(residents * p_travel * (1 - p_travel)));
        else
            CHECK(n == residents);
        double row = 0;
        for (double x : f[i])
            row += x;
        for (std::size_t j = 0; j < w.countries.size(); ++j) {
            if (i == j)
                continue;
            const double p = f[i][j] / row;
            std::int64_t observed = 0;
            for (const auto& e : net.edges)
                if (e.origin == w.countries[i].code && e.destination == w.countries[j].code)
                    observed = e.raw_weight;
            d.cells.push_back((double(observed) - n * p) / std::sqrt(n * p * (1 - p)));
        }
    }
    return d;
}

} // namespace

TEST_CASE("edge counts over 1e4 users match the multinomial flow proportions")
{
    const auto d = flow_deviations(39, 1700, 8);
    CHECK(double(d.users) >= 0.75 * 10200);
    CHECK(double(d.users) <= 1.25 * 10200);
    REQUIRE(d.cells.size() == 30);
    // 3 sigma per cell, Bonferroni-corrected over the 30 cells (and the travel counts)
    // to the same family-wise level: |z| <= 4.0
    for (double z : d.cells)
        CHECK(std::abs(z) <= 4.0);
    for (double z : d.travel)
        CHECK(std::abs(z) <= 4.0);
}

TEST_CASE("edge-count deviations are calibrated across seeds")
{
    std::size_t cells = 0, over = 0;
    double sum_sq = 0;
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
        const auto d = flow_deviations(seed, 1700, 4);
        for (const auto* v : {&d.cells, &d.travel})
            for (double z : *v) {
                ++cells;
                sum_sq += z * z;
                over += std::abs(z) > 3.0;
            }
    }
    const double rate = double(over) / double(cells);
    const double p3 = 0.0027;
    // exceedance rate of the 3 sigma bound and mean squared deviation both
    // agree with the binomial model
    CHECK(std::abs(rate - p3) <= 4 * std::sqrt(p3 * (1 - p3) / double(cells)));
    CHECK(sum_sq / double(cells) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("Levy walks")
{
    const auto w = make_world(40, {});
    LevyOptions lo;
    lo.users = 20;
    lo.events_per_user = 30;
    const auto ev = generate_levy_events(w, lo);
    CHECK(ev == generate_levy_events(w, lo));
    const auto traj = build_trajectories(ev);
    CHECK(traj.size() == 20);
    for (const auto& [id, t] : traj) {
        CHECK(t.events.size() == 30);
        for (std::size_t k = 1; k < t.events.size(); ++k) {
            const auto& a = t.events[k - 1];
            const auto& b = t.events[k];
            const double d = haversine_km(a.position(), b.position());
            CHECK(d >= 1.0 - 1e-9);
            CHECK(d <= 1e4 + 1e-6);
            CHECK(d / (double(b.timestamp - a.timestamp) / 3600) <= 800.0 + 1e-9);
            CHECK(b.source == "levy");
        }
    }
}
