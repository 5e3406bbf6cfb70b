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
#include "geoflow/metrics.hpp"
#include "geoflow/network.hpp"
#include "geoflow/random.hpp"
#include "geoflow/residence.hpp"

#include <cmath>

#include <doctest.h>

using namespace geoflow;

namespace
{

constexpr std::int64_t kJan1st2012 = 1325376000;
constexpr double kDegKm = M_PI * 6371.0088 / 180.0;

UserProfile profile(const std::string& id, const std::map<std::string, std::int64_t>& counts, const std::string& home)
{
    UserProfile p{id, counts, {}, home, 0, static_cast<int>(counts.size())};
    for (const auto& [c, n] : counts) {
        p.first_seen[c] = 0;
        p.total_events += n;
    }
    return p;
}

// Trajectories plus profiles from (user, day, country) triples.
struct World {
    TrajectoryMap trajectories;
    ProfileMap profiles;

    void add(const std::string& user, int day, const std::string& country, std::int64_t second = 0)
    {
        auto& t = trajectories[user];
        t.user_id = user;
        t.events.push_back({user, kJan1st2012 + day * 86400 + second, 0, 0, "web", country});
        profiles[user] = *build_profile(t);
    }
};

double sq_chord_sum(const std::vector<LatLon>& pts, const LatLon& c)
{
    const auto v = to_unit_vector(c);
    double s = 0;
    for (const auto& p : pts) {
        const auto u = to_unit_vector(p);
        for (int k = 0; k < 3; ++k)
            s += (u[k] - v[k]) * (u[k] - v[k]);
    }
    return s;
}

FlowNetwork network_from(const std::vector<FlowEdge>& edges, const std::vector<std::string>& codes)
{
    FlowNetwork n;
    for (const auto& c : codes)
        n.nodes.push_back({c, 1000, 1000, 1.0});
    n.edges = edges;
    n.normalized = true;
    return n;
}

} // namespace

TEST_CASE("is_mobile and mobility_rate")
{
    CHECK_FALSE(is_mobile(profile("a", {{"US", 10}}, "US")));
    CHECK(is_mobile(profile("a", {{"US", 10}, {"MX", 1}}, "US")));
    CHECK(is_mobile(profile("a", {{"US", 1}, {"MX", 1}, {"FR", 1}}, "FR")));

    ProfileMap m;
    for (int i = 0; i < 10; ++i) {
        const auto id = "u" + std::to_string(i);
        m[id] = i < 2 ? profile(id, {{"US", 5}, {"MX", 1}}, "US") : profile(id, {{"US", 5}}, "US");
        const auto jd = "f" + std::to_string(i);
        m[jd] = profile(jd, {{"FR", 5}, {"DE", 1}}, "FR");
        const auto kd = "g" + std::to_string(i);
        m[kd] = profile(kd, {{"GB", 5}}, "GB");
    }
    CHECK(mobility_rate("US", m) == doctest::Approx(0.2));
    CHECK(mobility_rate("FR", m) == 1.0);
    CHECK(mobility_rate("GB", m) == 0.0);
    CHECK_FALSE(mobility_rate("ZZ", m).has_value());
}

TEST_CASE("destination_diversity")
{
    ProfileMap m;
    m["a"] = profile("a", {{"US", 5}, {"MX", 1}}, "US");
    m["b"] = profile("b", {{"US", 5}, {"FR", 1}, {"MX", 2}}, "US");
    m["c"] = profile("c", {{"GB", 5}}, "GB");
    CHECK(destination_diversity("US", m) == 2);
    CHECK(destination_diversity("GB", m) == 0);
}

TEST_CASE("center_of_mass examples and least-squares oracle")
{
    const std::vector<LatLon> one{{12.5, -40}};
    const auto c1 = center_of_mass(one);
    REQUIRE(c1);
    CHECK(c1->lat == doctest::Approx(12.5));
    CHECK(c1->lon == doctest::Approx(-40));

    const std::vector<LatLon> two{{0, 0}, {0, 1}};
    const auto c2 = center_of_mass(two);
    REQUIRE(c2);
    CHECK(c2->lat == doctest::Approx(0).scale(1));
    CHECK(c2->lon == doctest::Approx(0.5));

    // the spherical mean minimises summed squared chord distance: no grid point does better
    Rng rng(8);
    std::vector<LatLon> cloud;
    for (int k = 0; k < 20; ++k)
        cloud.push_back({rng.uniform(30, 50), rng.uniform(-10, 20)});
    const auto c = *center_of_mass(cloud);
    const double best = sq_chord_sum(cloud, c);
    for (double lat = 30; lat <= 50; lat += 0.25)
        for (double lon = -10; lon <= 20; lon += 0.25)
            CHECK(sq_chord_sum(cloud, {lat, lon}) >= best - 1e-12);

    const std::vector<LatLon> antipodal{{0, 0}, {0, 180}};
    CHECK_FALSE(center_of_mass(antipodal).has_value());
    CHECK_THROWS_AS(center_of_mass(std::vector<LatLon>{}), DataError);
}

TEST_CASE("radius_of_gyration")
{
    const std::vector<LatLon> same{{3, 4}, {3, 4}, {3, 4}};
    CHECK(radius_of_gyration(same) == 0.0);
    const std::vector<LatLon> two{{0, 0}, {0, 1}};
    CHECK(radius_of_gyration(two) == doctest::Approx(kDegKm / 2).epsilon(1e-10));
    CHECK(radius_of_gyration(two) == doctest::Approx(55.597).epsilon(1e-5));

    // direct root-mean-square evaluation about the centre of mass
    Rng rng(9);
    std::vector<LatLon> cloud;
    for (int k = 0; k < 30; ++k)
        cloud.push_back({rng.uniform(-20, 20), rng.uniform(100, 140)});
    const auto c = *center_of_mass(cloud);
    double sq = 0;
    for (const auto& p : cloud)
        sq += std::pow(haversine_km(p, c), 2);
    CHECK(radius_of_gyration(cloud) == doctest::Approx(std::sqrt(sq / 30)).epsilon(1e-12));

    // antipodal fallback measures from the first point
    const std::vector<LatLon> anti{{0, 0}, {0, 180}};
    CHECK(radius_of_gyration(anti) == doctest::Approx(std::sqrt(std::pow(M_PI * 6371.0088, 2) / 2)));
}

TEST_CASE("displacements")
{
    Trajectory t{"u", {{"u", 0, 0, 0, "w", {}}}};
    CHECK(displacements(t).empty());
    t.events.push_back({"u", 1, 0, 1, "w", {}});
    t.events.push_back({"u", 2, 0, 1, "w", {}});
    const auto d = displacements(t);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(111.195).epsilon(1e-5));
    CHECK(d[1] == 0.0);
}

TEST_CASE("user metrics and mobility profiles")
{
    TrajectoryMap tm;
    tm["a"] = {"a", {{"a", 0, 0, 0, "w", "AA"}, {"a", 10, 0, 1, "w", "AA"}, {"a", 20, 0, 0, "w", "BB"}}};
    tm["b"] = {"b", {{"b", 0, 5, 5, "w", "AA"}}};
    const auto profiles = build_profiles(tm);
    const auto users = compute_user_metrics(profiles, tm);
    REQUIRE(users.size() == 2);
    CHECK(users[0].mobile);
    CHECK_FALSE(users[1].mobile);
    CHECK(users[1].radius_km == 0.0);
    CHECK(compute_user_metrics(profiles, tm, 3).size() == 2);
    const auto mp = mobility_profiles(profiles, users);
    REQUIRE(mp.size() == 1);
    CHECK(mp[0].country == "AA");
    CHECK(mp[0].n_residents == 2);
    CHECK(mp[0].n_mobile == 1);
    CHECK(mp[0].mobility_rate == 0.5);
    CHECK(mp[0].countries_visited == 1);
    CHECK(mp[0].mean_radius_km == doctest::Approx(users[0].radius_km / 2));
    const auto mobile_only = mobility_profiles(profiles, users, RadiusPopulation::MobileOnly);
    CHECK(mobile_only[0].mean_radius_km == doctest::Approx(users[0].radius_km));
}

TEST_CASE("calendar helpers")
{
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(days_from_civil(2012, 1, 1) * 86400 == kJan1st2012);
    CHECK(days_from_civil(2000, 3, 1) - days_from_civil(2000, 2, 28) == 2);
    CHECK(days_in_year(2012) == 366);
    CHECK(days_in_year(2013) == 365);
    CHECK(days_in_year(1900) == 365);
    CHECK(days_in_year(2000) == 366);
}

TEST_CASE("normalize_series")
{
    const std::vector<std::int64_t> v{0, 40, 20, 10};
    CHECK(normalize_series(v) == std::vector<double>{0, 100, 50, 25});
    const std::vector<std::int64_t> z(5, 0);
    CHECK(normalize_series(z) == std::vector<double>(5, 0.0));
}

TEST_CASE("daily abroad series count distinct users per day")
{
    World w;
    for (int d = 0; d < 8; ++d)
        w.add("a", d == 3 ? 9 : d, "AA");
    for (int k = 0; k < 5; ++k)
        w.add("a", 3, "BB", k * 60);
    w.add("b", 5, "AA");
    w.add("b", 6, "AA");
    w.add("b", 7, "AA");
    w.add("b", 3, "BB");
    w.add("b", 4, "BB");
    w.add("c", 0, "CC");
    w.add("c", 1, "CC");

    const auto out = daily_abroad_series(w.profiles, w.trajectories, Direction::Outbound, 2012);
    REQUIRE(out.count("AA") == 1);
    const auto& aa = out.at("AA");
    CHECK(aa.values.size() == 366);
    CHECK(aa.values[3] == 2);
    CHECK(aa.values[4] == 1);
    CHECK(aa.values[0] == 0);
    CHECK(aa.normalized[3] == 100.0);
    CHECK(aa.normalized[4] == 50.0);
    const auto& cc = out.at("CC");
    CHECK(std::all_of(cc.values.begin(), cc.values.end(), [](auto v) { return v == 0; }));
    CHECK(std::all_of(cc.normalized.begin(), cc.normalized.end(), [](auto v) { return v == 0.0; }));

    const auto in = daily_abroad_series(w.profiles, w.trajectories, Direction::Inbound, 2012);
    CHECK(in.at("BB").values[3] == 2);
    CHECK(in.at("AA").values[3] == 0);

    const auto g = global_abroad_series(w.profiles, w.trajectories, 2012);
    CHECK(g.values[3] == 2);
    CHECK(g.values[4] == 1);
    CHECK(g.normalized[3] == 100.0);

    // events outside the year are ignored
    World late;
    late.add("x", 0, "AA");
    late.add("x", 1, "AA");
    late.add("x", 400, "BB");
    const auto lo = daily_abroad_series(late.profiles, late.trajectories, Direction::Outbound, 2012);
    CHECK(std::all_of(lo.at("AA").values.begin(), lo.at("AA").values.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("build_flow_network counts distinct users")
{
    ProfileMap m;
    for (int i = 0; i < 3; ++i) {
        const auto id = "a" + std::to_string(i);
        m[id] = profile(id, {{"AA", 5}, {"BB", i == 0 ? 2 : 1}}, "AA");
    }
    m["c"] = profile("c", {{"CC", 5}, {"AA", 1}, {"BB", 1}}, "CC");
    m["d"] = profile("d", {{"DD", 5}}, "DD");
    const auto net = build_flow_network(m);
    CHECK_FALSE(net.normalized);
    REQUIRE(net.edges.size() == 3);
    CHECK(net.edges[0].origin == "AA");
    CHECK(net.edges[0].destination == "BB");
    CHECK(net.edges[0].raw_weight == 3);
    CHECK(net.edges[0].est_weight == 3.0);
    CHECK(net.edges[1].origin == "CC");
    CHECK(net.edges[1].destination == "AA");
    CHECK(net.edges[1].raw_weight == 1);
    CHECK(net.edges[2].destination == "BB");
    const auto* aa = net.find_node("AA");
    REQUIRE(aa);
    CHECK(aa->residents == 3);
    CHECK(aa->mobile_residents == 3);
    REQUIRE(net.find_node("DD"));
    CHECK(net.find_node("DD")->mobile_residents == 0);
}

TEST_CASE("normalize_and_filter")
{
    FlowNetwork net;
    net.nodes = {{"AA", 5000, 600, {}}, {"BB", 5000, 600, {}}, {"CC", 5000, 499, {}}, {"DD", 400, 600, {}},
                 {"EE", 5000, 600, {}}};
    net.edges = {{"AA", "BB", 50, 50}, {"AA", "CC", 7, 7}, {"BB", "AA", 20, 20}, {"DD", "AA", 3, 3},
                 {"EE", "AA", 9, 9}};
    CountryStatsMap stats;
    auto put = [&](const std::string& c, std::int64_t residents, std::optional<std::int64_t> pop) {
        CountryStats s;
        s.code = c;
        s.residents = residents;
        s.population = pop;
        s.penetration = pop ? double(residents) / double(*pop) : 0.0;
        stats[c] = s;
    };
    put("AA", 5000, 500000);  // 0.01
    put("BB", 5000, 2000000); // 0.0025
    put("CC", 5000, 500000);
    put("DD", 400, 1000000); // 0.0004
    put("EE", 5000, std::nullopt);
    const auto out = normalize_and_filter(net, stats);
    CHECK(out.normalized);
    REQUIRE(out.nodes.size() == 2);
    CHECK(out.nodes[0].code == "AA");
    CHECK(out.nodes[1].code == "BB");
    REQUIRE(out.edges.size() == 2);
    CHECK(out.edges[0].est_weight == doctest::Approx(5000));
    CHECK(out.edges[1].est_weight == doctest::Approx(8000));
    CHECK(*out.nodes[0].penetration == doctest::Approx(0.01));
}

TEST_CASE("balances")
{
    const auto sym = network_from({{"AA", "BB", 1, 7.5}, {"BB", "AA", 1, 7.5}}, {"AA", "BB"});
    for (const auto& b : inflow_outflow_balance(sym))
        CHECK(b.balance == 0.0);

    const auto one = network_from({{"AA", "BB", 1, 100}}, {"AA", "BB"});
    const auto b = inflow_outflow_balance(one);
    REQUIRE(b.size() == 2);
    CHECK(b[0].balance == -100.0);
    CHECK(b[1].balance == 100.0);
    CHECK(b[1].inflow == 100.0);
    CHECK(b[0].outflow == 100.0);

    Rng rng(10);
    std::vector<std::string> codes;
    for (char c = 'A'; c <= 'Z'; ++c)
        codes.push_back(std::string(2, c));
    std::vector<FlowEdge> edges;
    for (const auto& o : codes)
        for (const auto& d : codes)
            if (o != d && rng.bernoulli(0.5))
                edges.push_back({o, d, 1, std::exp(rng.uniform(-10, 20))});
    const auto big = network_from(edges, codes);
    CHECK(total_balance(big) == 0.0);
    CHECK(total_balance(big, WeightKind::Raw) == 0.0);
    std::vector<double> bal;
    for (const auto& x : inflow_outflow_balance(big))
        bal.push_back(x.balance);
    double mag = 0;
    for (const auto& e : edges)
        mag += e.est_weight;
    CHECK(std::abs(exact_sum(bal)) <= 1e-15 * mag);
}

TEST_CASE("top_k_flows")
{
    const auto net = network_from({{"AA", "BB", 5, 5}, {"BB", "AA", 3, 3}}, {"AA", "BB"});
    auto top = top_k_flows(net, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].origin == "AA");
    CHECK(top_k_flows(net, 10).size() == 2);

    const auto tie = network_from({{"BB", "AA", 1, 4}, {"AA", "CC", 1, 4}, {"AA", "BB", 1, 4}}, {"AA", "BB", "CC"});
    top = top_k_flows(tie, 3);
    CHECK(top[0].destination == "BB");
    CHECK(top[1].destination == "CC");
    CHECK(top[2].origin == "BB");

    const auto raw = network_from({{"AA", "BB", 1, 10}, {"BB", "AA", 2, 1}}, {"AA", "BB"});
    CHECK(top_k_flows(raw, 1, WeightKind::Raw)[0].origin == "BB");
}
