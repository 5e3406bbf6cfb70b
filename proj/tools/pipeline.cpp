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
#include "geoflow/pipeline.hpp"
#include "geoflow/boundary.hpp"
#include "geoflow/clean.hpp"
#include "geoflow/community.hpp"
#include "geoflow/csv.hpp"
#include "geoflow/error.hpp"
#include "geoflow/metrics.hpp"
#include "geoflow/models.hpp"
#include "geoflow/random.hpp"
#include "geoflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace geoflow
{

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace
{

// artifact names
constexpr const char* kEvents = "events.csv";
constexpr const char* kIngestErrors = "ingest_errors.csv";
constexpr const char* kIngestReport = "ingest_report.csv";
constexpr const char* kCleanEvents = "clean_events.csv";
constexpr const char* kCleanReport = "clean_report.csv";
constexpr const char* kCleanSummary = "clean_summary.csv";
constexpr const char* kProfiles = "profiles.csv";
constexpr const char* kUserCountries = "user_countries.csv";
constexpr const char* kCountryStats = "country_stats.csv";
constexpr const char* kUserMetrics = "user_metrics.csv";
constexpr const char* kMobilityProfiles = "mobility_profiles.csv";
constexpr const char* kDailyOutbound = "daily_outbound.csv";
constexpr const char* kDailyInbound = "daily_inbound.csv";
constexpr const char* kDailyGlobal = "daily_global.csv";
constexpr const char* kNodes = "nodes.csv";
constexpr const char* kEdges = "edges.csv";
constexpr const char* kBalance = "balance.csv";
constexpr const char* kTopFlows = "top_flows.csv";
constexpr const char* kNetworkSummary = "network_summary.csv";
constexpr const char* kCommunities = "communities.csv";
constexpr const char* kCommunityLevels = "community_levels.csv";
constexpr const char* kCommunityTree = "community_tree.csv";
constexpr const char* kGravityFit = "gravity_fit.json";
constexpr const char* kPowerlawFit = "powerlaw_fit.json";
constexpr const char* kValidation = "validation.json";
constexpr const char* kReport = "report.json";

// stream key for the community optimiser seed
constexpr std::uint64_t kCommunityKey = 0xC0;

std::string num(double v)
{
    return format_number(v);
}

std::string num(std::int64_t v)
{
    return std::to_string(v);
}

std::string num(std::size_t v)
{
    return std::to_string(v);
}

void write_json(const fs::path& path, const json& j)
{
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

json read_json(const fs::path& path)
{
    auto in = open_input(path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw DataError(fmt::format("{}: not valid JSON", path.string()));
    return j;
}

std::int64_t int_field(const std::string& s, const fs::path& file, std::size_t row)
{
    auto v = parse_int(s);
    if (!v)
        throw DataError(fmt::format("{}: row {}: bad integer '{}'", file.string(), row + 2, s));
    return *v;
}

double double_field(const std::string& s, const fs::path& file, std::size_t row)
{
    auto v = parse_double(s);
    if (!v)
        throw DataError(fmt::format("{}: row {}: bad number '{}'", file.string(), row + 2, s));
    return *v;
}

/// key,value table reader for the *_report / *_summary artifacts.
std::map<std::string, std::string> read_key_values(const fs::path& path)
{
    const auto t = read_csv_table(path);
    const auto k = t.column("metric");
    const auto v = t.column("value");
    std::map<std::string, std::string> out;
    for (const auto& row : t.rows)
        out[row[k]] = row[v];
    return out;
}

json number_or_string(const std::string& s)
{
    if (auto i = parse_int(s))
        return *i;
    if (auto d = parse_double(s))
        return *d;
    return s;
}

json fit_json(const PowerLawFit& f)
{
    json j;
    j["exponent"] = f.exponent;
    j["std_error"] = f.std_error;
    j["xmin"] = f.xmin;
    j["xmax"] = f.xmax ? json(*f.xmax) : json(nullptr);
    j["n_tail"] = f.n_tail;
    return j;
}

json fit_json(const LogLogFit& f)
{
    return {{"exponent", f.exponent}, {"intercept", f.intercept}, {"r2", f.r2}, {"n", f.n}};
}

json fit_json(const GravityFit& f)
{
    json j;
    j["log_a"] = f.log_a;
    j["alpha"] = f.alpha;
    j["beta"] = f.beta;
    j["gamma"] = f.gamma;
    j["se_log_a"] = f.se_log_a;
    j["se_alpha"] = f.se_alpha;
    j["se_beta"] = f.se_beta;
    j["se_gamma"] = f.se_gamma;
    j["r2"] = f.r2;
    j["n_pairs"] = f.n_pairs;
    j["excluded_zero"] = f.excluded_zero;
    j["excluded_near"] = f.excluded_near;
    j["excluded_missing"] = f.excluded_missing;
    return j;
}

json validation_json(const ExternalValidation& v)
{
    return {{"r2", v.r2},
            {"slope", v.slope},
            {"intercept", v.intercept},
            {"matched", v.matched},
            {"only_estimates", v.only_estimates},
            {"only_reference", v.only_reference}};
}

/// Power-law fit honouring the optional upper cut-off.
PowerLawFit fit_tail(std::span<const double> samples, double xmin, const std::optional<double>& xmax)
{
    return xmax ? fit_truncated_power_law(samples, xmin, *xmax) : fit_power_law(samples, xmin);
}

/// Runs a fit that may legitimately be impossible on small data; the error
/// message is recorded instead.
template <class F>
json try_fit(F&& f)
{
    try {
        return f();
    } catch (const DataError& e) {
        return {{"error", e.what()}};
    }
}

} // namespace

// -- readers ------------------------------------------------------------------

std::string stage_name(Stage stage)
{
    switch (stage) {
    case Stage::Ingest:
        return "ingest";
    case Stage::Clean:
        return "clean";
    case Stage::Residence:
        return "residence";
    case Stage::Metrics:
        return "metrics";
    case Stage::Network:
        return "network";
    case Stage::Communities:
        return "communities";
    case Stage::Fit:
        return "fit";
    }
    return "?";
}

std::optional<Stage> parse_stage(const std::string& name)
{
    if (name == "profile")
        return Stage::Residence;
    for (Stage s : kAllStages)
        if (stage_name(s) == name)
            return s;
    return std::nullopt;
}

TrajectoryMap read_trajectories(const fs::path& events_csv, unsigned workers)
{
    auto in = open_input(events_csv);
    auto parsed = parse_events(in);
    if (!parsed.errors.empty()) {
        const auto& e = parsed.errors.front();
        throw DataError(fmt::format("{}: line {}: {}", events_csv.string(), e.line, e.message));
    }
    return build_trajectories(std::move(parsed.events), workers);
}

ProfileMap read_profiles(const fs::path& profiles_csv, const fs::path& user_countries_csv)
{
    ProfileMap profiles;
    {
        const auto t = read_csv_table(profiles_csv);
        const auto c_user = t.column("user_id"), c_res = t.column("residence"), c_total = t.column("total_events"),
                   c_dist = t.column("distinct_countries");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            UserProfile p;
            p.user_id = row[c_user];
            p.residence = row[c_res];
            p.total_events = int_field(row[c_total], profiles_csv, r);
            p.distinct_countries = static_cast<int>(int_field(row[c_dist], profiles_csv, r));
            profiles.emplace(p.user_id, std::move(p));
        }
    }
    const auto t = read_csv_table(user_countries_csv);
    const auto c_user = t.column("user_id"), c_country = t.column("country"), c_events = t.column("events"),
               c_first = t.column("first_seen");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        auto it = profiles.find(row[c_user]);
        if (it == profiles.end())
            throw DataError(fmt::format("{}: row {}: user '{}' has no profile", user_countries_csv.string(), r + 2,
                                        row[c_user]));
        it->second.counts[row[c_country]] = int_field(row[c_events], user_countries_csv, r);
        it->second.first_seen[row[c_country]] = int_field(row[c_first], user_countries_csv, r);
    }
    for (const auto& [id, p] : profiles)
        if (!p.counts.count(p.residence) || static_cast<int>(p.counts.size()) != p.distinct_countries)
            throw DataError(fmt::format("profiles for '{}' are inconsistent", id));
    return profiles;
}

CountryStatsMap read_country_stats(const fs::path& path)
{
    const auto t = read_csv_table(path);
    const auto c_code = t.column("code"), c_res = t.column("residents"), c_pop = t.column("population"),
               c_gdp = t.column("gdp_per_capita"), c_pen = t.column("penetration"), c_inc = t.column("included"),
               c_reason = t.column("reason");
    CountryStatsMap stats;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        CountryStats s;
        s.code = row[c_code];
        s.residents = int_field(row[c_res], path, r);
        if (!row[c_pop].empty())
            s.population = int_field(row[c_pop], path, r);
        if (!row[c_gdp].empty())
            s.gdp_per_capita = double_field(row[c_gdp], path, r);
        s.penetration = double_field(row[c_pen], path, r);
        s.included = row[c_inc] == "1";
        s.reason = row[c_reason];
        stats.emplace(s.code, std::move(s));
    }
    return stats;
}

FlowNetwork read_network(const fs::path& nodes_csv, const fs::path& edges_csv)
{
    FlowNetwork net;
    net.normalized = true;
    {
        const auto t = read_csv_table(nodes_csv);
        const auto c_code = t.column("code"), c_res = t.column("residents"), c_mob = t.column("mobile_residents"),
                   c_pen = t.column("penetration");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto& row = t.rows[r];
            FlowNode n;
            n.code = row[c_code];
            n.residents = int_field(row[c_res], nodes_csv, r);
            n.mobile_residents = int_field(row[c_mob], nodes_csv, r);
            if (!row[c_pen].empty())
                n.penetration = double_field(row[c_pen], nodes_csv, r);
            net.nodes.push_back(std::move(n));
        }
    }
    const auto t = read_csv_table(edges_csv);
    const auto c_o = t.column("origin"), c_d = t.column("destination"), c_raw = t.column("raw_weight"),
               c_est = t.column("est_weight");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        net.edges.push_back(
            {row[c_o], row[c_d], int_field(row[c_raw], edges_csv, r), double_field(row[c_est], edges_csv, r)});
    }
    std::sort(net.nodes.begin(), net.nodes.end(), [](const auto& a, const auto& b) { return a.code < b.code; });
    std::sort(net.edges.begin(), net.edges.end(), [](const auto& a, const auto& b) {
        return std::tie(a.origin, a.destination) < std::tie(b.origin, b.destination);
    });
    return net;
}

std::string iso_date(std::int64_t days)
{
    // inverse of days_from_civil
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const auto doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2 ? 1 : 0);
    return fmt::format("{:04d}-{:02d}-{:02d}", y, m, d);
}

// -- pipeline -----------------------------------------------------------------

Pipeline::Pipeline(Config config, std::ostream* log) : config_(std::move(config)), log_(log) {}

template <class... Args>
void Pipeline::info(const char* stage, const char* format, Args&&... args)
{
    if (log_)
        *log_ << '[' << stage << "] " << fmt::format(fmt::runtime(format), std::forward<Args>(args)...) << '\n';
}

fs::path Pipeline::need_artifact(const std::string& name, Stage producer) const
{
    auto p = config_.out(name);
    if (!fs::exists(p))
        throw StageOrderError(fmt::format("{} not found; run stage '{}' first", p.string(), stage_name(producer)));
    return p;
}

fs::path Pipeline::need_input(const std::optional<fs::path>& p, const std::string& key) const
{
    if (!p)
        throw ConfigError(fmt::format("config key '{}' is not set", key));
    auto path = config_.resolve(*p);
    if (!fs::exists(path))
        throw InputError(fmt::format("{} '{}' does not exist", key, path.string()));
    return path;
}

void Pipeline::ingest()
{
    const auto events_path = need_input(config_.ingest.events, "ingest.events");
    auto in = open_input(events_path);
    auto parsed = parse_events(in);
    const std::size_t parsed_events = parsed.events.size();

    std::size_t unlabeled = 0;
    if (config_.ingest.boundaries) {
        BoundaryIndex index(read_boundaries_geojson(need_input(config_.ingest.boundaries, "ingest.boundaries")));
        unlabeled = label_events(parsed.events, index, config_.workers);
    } else {
        unlabeled = static_cast<std::size_t>(
            std::count_if(parsed.events.begin(), parsed.events.end(), [](const GeoEvent& e) { return !e.country; }));
    }
    const auto trajectories = build_trajectories(std::move(parsed.events), config_.workers);
    const auto events = flatten(trajectories);
    {
        auto out = open_output(config_.out(kEvents));
        write_events(out, events);
    }
    CsvTable errors{{"line", "message"}, {}};
    for (const auto& e : parsed.errors)
        errors.rows.push_back({num(e.line), e.message});
    write_csv_table(config_.out(kIngestErrors), errors);

    CsvTable report{{"metric", "value"}, {}};
    report.rows = {{"data_lines", num(parsed.data_lines)},
                   {"had_header", parsed.had_header ? "1" : "0"},
                   {"parsed_events", num(parsed_events)},
                   {"error_lines", num(parsed.errors.size())},
                   {"unlabeled_events", num(unlabeled)},
                   {"users", num(trajectories.size())}};
    write_csv_table(config_.out(kIngestReport), report);
    info("ingest", "{} events from {} users, {} bad lines, {} unlabelled", parsed_events, trajectories.size(),
         parsed.errors.size(), unlabeled);
}

void Pipeline::clean()
{
    const auto trajectories = read_trajectories(need_artifact(kEvents, Stage::Ingest), config_.workers);
    std::size_t events_in = 0;
    for (const auto& [_, t] : trajectories)
        events_in += t.events.size();

    const auto speed = speed_filter(trajectories, config_.clean.max_speed_kmh, config_.workers);
    const auto after_speed = flatten(speed.trajectories);

    SourceFilterOptions options;
    options.coverage = config_.clean.source_coverage;
    options.weight = config_.clean.popularity_weight == "events" ? PopularityWeight::Events : PopularityWeight::Users;
    const auto sources = source_popularity_filter(after_speed, options);
    {
        auto out = open_output(config_.out(kCleanEvents));
        write_events(out, sources.events);
    }

    CsvTable report{{"country", "rank", "source", "users", "events", "retained"}, {}};
    for (const auto& [country, ranking] : sources.rankings)
        for (std::size_t i = 0; i < ranking.size(); ++i)
            report.rows.push_back({country, num(i + 1), ranking[i].source, num(ranking[i].users),
                                   num(ranking[i].events), ranking[i].retained ? "1" : "0"});
    write_csv_table(config_.out(kCleanReport), report);

    const auto& st = sources.stats;
    CsvTable summary{{"metric", "value"}, {}};
    summary.rows = {{"events_in", num(events_in)},
                    {"speed_removed", num(speed.removed)},
                    {"unlabeled_removed", num(st.unlabeled_events)},
                    {"source_events_before", num(st.events_before)},
                    {"source_events_after", num(st.events_after)},
                    {"source_users_before", num(st.users_before)},
                    {"source_users_after", num(st.users_after)},
                    {"user_retention", num(st.user_retention())},
                    {"event_retention", num(st.event_retention())},
                    {"events_out", num(sources.events.size())}};
    write_csv_table(config_.out(kCleanSummary), summary);
    info("clean", "{} -> {} events ({} too fast, {} unlabelled, {} from dropped sources)", events_in,
         sources.events.size(), speed.removed, st.unlabeled_events, st.events_before - st.events_after);
}

void Pipeline::residence()
{
    const auto trajectories = read_trajectories(need_artifact(kCleanEvents, Stage::Clean), config_.workers);
    const auto profiles = build_profiles(trajectories, config_.workers);
    Census census;
    if (config_.residence.census)
        census = read_census(need_input(config_.residence.census, "residence.census"));
    ResidenceThresholds thresholds{config_.residence.min_penetration, config_.residence.min_residents};
    const auto stats = compute_country_stats(profiles, census, thresholds);

    CsvTable prof{{"user_id", "residence", "total_events", "distinct_countries"}, {}};
    CsvTable uc{{"user_id", "country", "events", "first_seen"}, {}};
    for (const auto& [id, p] : profiles) {
        prof.rows.push_back({id, p.residence, num(p.total_events), num(std::int64_t{p.distinct_countries})});
        for (const auto& [country, n] : p.counts)
            uc.rows.push_back({id, country, num(n), num(p.first_seen.at(country))});
    }
    write_csv_table(config_.out(kProfiles), prof);
    write_csv_table(config_.out(kUserCountries), uc);

    CsvTable cs{{"code", "residents", "population", "gdp_per_capita", "penetration", "included", "reason"}, {}};
    std::size_t included = 0;
    for (const auto& [code, s] : stats) {
        cs.rows.push_back({code, num(s.residents), s.population ? num(*s.population) : "",
                           s.gdp_per_capita ? num(*s.gdp_per_capita) : "", num(s.penetration),
                           s.included ? "1" : "0", s.reason});
        included += s.included ? 1 : 0;
    }
    write_csv_table(config_.out(kCountryStats), cs);
    info("residence", "{} users in {} countries, {} included", profiles.size(), stats.size(), included);
}

void Pipeline::metrics()
{
    const auto profiles = read_profiles(need_artifact(kProfiles, Stage::Residence),
                                        need_artifact(kUserCountries, Stage::Residence));
    const auto trajectories = read_trajectories(need_artifact(kCleanEvents, Stage::Clean), config_.workers);
    const auto users = compute_user_metrics(profiles, trajectories, config_.workers);
    const auto radius_over = config_.metrics.radius_population == "mobile" ? RadiusPopulation::MobileOnly
                                                                           : RadiusPopulation::AllResidents;
    const auto mp = mobility_profiles(profiles, users, radius_over);

    CsvTable um{{"user_id", "residence", "n_events", "distinct_countries", "radius_km", "mobile"}, {}};
    for (const auto& u : users)
        um.rows.push_back({u.user_id, u.residence, num(u.n_events), num(std::int64_t{u.distinct_countries}),
                           num(u.radius_km), u.mobile ? "1" : "0"});
    write_csv_table(config_.out(kUserMetrics), um);

    CsvTable mpt{{"country", "n_residents", "n_mobile", "mobility_rate", "mean_radius_km", "countries_visited"}, {}};
    for (const auto& m : mp)
        mpt.rows.push_back({m.country, num(m.n_residents), num(m.n_mobile), num(m.mobility_rate),
                            num(m.mean_radius_km), num(std::int64_t{m.countries_visited})});
    write_csv_table(config_.out(kMobilityProfiles), mpt);

    const int year = config_.metrics.year;
    const std::int64_t day0 = days_from_civil(year, 1, 1);
    auto series_table = [&](const std::vector<const DailySeries*>& series) {
        CsvTable t{{"country", "day", "date", "value", "normalized"}, {}};
        for (const auto* s : series)
            for (std::size_t d = 0; d < s->values.size(); ++d)
                t.rows.push_back({s->country, num(d + 1), iso_date(day0 + static_cast<std::int64_t>(d)),
                                  num(s->values[d]), num(s->normalized[d])});
        return t;
    };
    const auto outbound = daily_abroad_series(profiles, trajectories, Direction::Outbound, year);
    const auto inbound = daily_abroad_series(profiles, trajectories, Direction::Inbound, year);
    const auto global = global_abroad_series(profiles, trajectories, year);
    std::vector<const DailySeries*> out_ptrs, in_ptrs;
    for (const auto& [_, s] : outbound)
        out_ptrs.push_back(&s);
    for (const auto& [_, s] : inbound)
        in_ptrs.push_back(&s);
    write_csv_table(config_.out(kDailyOutbound), series_table(out_ptrs));
    write_csv_table(config_.out(kDailyInbound), series_table(in_ptrs));
    write_csv_table(config_.out(kDailyGlobal), series_table({&global}));

    if (config_.metrics.figures) {
        const auto dir = config_.resolve(config_.output_dir) / "figures";
        auto sorted = mp;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const auto& a, const auto& b) { return a.mobility_rate > b.mobility_rate; });
        CsvTable rate{{"country", "mobility_percent", "n_residents"}, {}};
        for (const auto& m : sorted)
            rate.rows.push_back({m.country, num(100.0 * m.mobility_rate), num(m.n_residents)});
        write_csv_table(dir / "mobility_rate.csv", rate);
        CsvTable visited{{"country", "countries_visited", "mean_radius_km"}, {}};
        for (const auto& m : mp)
            visited.rows.push_back({m.country, num(std::int64_t{m.countries_visited}), num(m.mean_radius_km)});
        write_csv_table(dir / "countries_visited.csv", visited);
        // one column per country, one row per day
        for (const auto& [name, series] : {std::pair{"daily_outbound_wide.csv", &outbound},
                                           std::pair{"daily_inbound_wide.csv", &inbound}}) {
            CsvTable wide{{"date"}, {}};
            for (const auto& [c, _] : *series)
                wide.header.push_back(c);
            const auto days = static_cast<std::size_t>(days_in_year(year));
            for (std::size_t d = 0; d < days; ++d) {
                std::vector<std::string> row{iso_date(day0 + static_cast<std::int64_t>(d))};
                for (const auto& [_, s] : *series)
                    row.push_back(num(s.normalized[d]));
                wide.rows.push_back(std::move(row));
            }
            write_csv_table(dir / name, wide);
        }
    }
    std::int64_t mobile = 0;
    for (const auto& u : users)
        mobile += u.mobile ? 1 : 0;
    info("metrics", "{} users, {} mobile, {} countries", users.size(), mobile, mp.size());
}

void Pipeline::network()
{
    const auto profiles = read_profiles(need_artifact(kProfiles, Stage::Residence),
                                        need_artifact(kUserCountries, Stage::Residence));
    const auto stats = read_country_stats(need_artifact(kCountryStats, Stage::Residence));
    const auto raw = build_flow_network(profiles);
    NetworkFilter filter{config_.network.min_outgoing, config_.network.min_penetration,
                         config_.network.min_residents};
    const auto net = normalize_and_filter(raw, stats, filter);

    CsvTable nodes{{"code", "residents", "mobile_residents", "penetration"}, {}};
    for (const auto& n : net.nodes)
        nodes.rows.push_back(
            {n.code, num(n.residents), num(n.mobile_residents), n.penetration ? num(*n.penetration) : ""});
    write_csv_table(config_.out(kNodes), nodes);

    CsvTable edges{{"origin", "destination", "raw_weight", "est_weight"}, {}};
    for (const auto& e : net.edges)
        edges.rows.push_back({e.origin, e.destination, num(e.raw_weight), num(e.est_weight)});
    write_csv_table(config_.out(kEdges), edges);

    const auto balances = inflow_outflow_balance(net, WeightKind::Est);
    CsvTable bal{{"country", "inflow", "outflow", "balance"}, {}};
    for (const auto& b : balances)
        bal.rows.push_back({b.country, num(b.inflow), num(b.outflow), num(b.balance)});
    write_csv_table(config_.out(kBalance), bal);

    const auto top = top_k_flows(net, static_cast<std::size_t>(config_.network.top_k), WeightKind::Est);
    CsvTable topt{{"rank", "origin", "destination", "raw_weight", "est_weight"}, {}};
    for (std::size_t i = 0; i < top.size(); ++i)
        topt.rows.push_back({num(i + 1), top[i].origin, top[i].destination, num(top[i].raw_weight),
                             num(top[i].est_weight)});
    write_csv_table(config_.out(kTopFlows), topt);

    std::int64_t raw_total = 0;
    for (const auto& e : raw.edges)
        raw_total += e.raw_weight;
    CsvTable summary{{"metric", "value"}, {}};
    summary.rows = {{"nodes_before_filter", num(raw.nodes.size())},
                    {"edges_before_filter", num(raw.edges.size())},
                    {"raw_weight_before_filter", num(raw_total)},
                    {"nodes", num(net.nodes.size())},
                    {"edges", num(net.edges.size())},
                    {"total_balance", num(total_balance(net, WeightKind::Est))}};
    write_csv_table(config_.out(kNetworkSummary), summary);

    if (config_.metrics.figures) {
        auto sorted = balances;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const auto& a, const auto& b) { return a.balance > b.balance; });
        CsvTable fig{{"country", "balance", "inflow", "outflow"}, {}};
        for (const auto& b : sorted)
            fig.rows.push_back({b.country, num(b.balance), num(b.inflow), num(b.outflow)});
        write_csv_table(config_.resolve(config_.output_dir) / "figures" / "balance.csv", fig);
    }
    info("network", "{} of {} countries kept, {} edges", net.nodes.size(), raw.nodes.size(), net.edges.size());
}

void Pipeline::communities()
{
    const auto net = read_network(need_artifact(kNodes, Stage::Network), need_artifact(kEdges, Stage::Network));
    const auto kind = config_.communities.weights == "raw" ? WeightKind::Raw : WeightKind::Est;
    const auto graph = Digraph::from_network(net, kind, config_.communities.symmetrize);
    HierarchyOptions options;
    options.max_levels = config_.communities.max_levels;
    options.optimizer.restarts = config_.communities.restarts;
    const auto h = hierarchical_partition(graph, derive_seed(config_.seed, kCommunityKey), options);

    CsvTable assign{{"country"}, {}};
    for (std::size_t k = 0; k < h.levels.size(); ++k)
        assign.header.push_back(fmt::format("level{}", k + 1));
    for (std::size_t i = 0; i < graph.size(); ++i) {
        std::vector<std::string> row{graph.labels()[i]};
        for (const auto& level : h.levels)
            row.push_back(num(std::int64_t{level.assignment[i]}));
        assign.rows.push_back(std::move(row));
    }
    write_csv_table(config_.out(kCommunities), assign);

    CsvTable levels{{"level", "communities", "modularity"}, {}};
    for (std::size_t k = 0; k < h.levels.size(); ++k)
        levels.rows.push_back(
            {num(k + 1), num(std::int64_t{h.levels[k].communities()}), num(h.levels[k].q)});
    write_csv_table(config_.out(kCommunityLevels), levels);

    CsvTable tree{{"level", "community", "parent", "size", "members"}, {}};
    for (std::size_t k = 0; k < h.levels.size(); ++k) {
        const auto& level = h.levels[k];
        for (int c = 0; c < level.communities(); ++c) {
            std::string members;
            std::size_t size = 0;
            for (std::size_t i = 0; i < graph.size(); ++i)
                if (level.assignment[i] == c) {
                    members += (size ? " " : "") + graph.labels()[i];
                    ++size;
                }
            const std::string parent = k == 0 ? "" : num(std::int64_t{h.parents[k][static_cast<std::size_t>(c)]});
            tree.rows.push_back({num(k + 1), num(std::int64_t{c}), parent, num(size), members});
        }
    }
    write_csv_table(config_.out(kCommunityTree), tree);
    info("communities", "{} nodes; level sizes {}", graph.size(), [&] {
        std::string s;
        for (const auto& l : h.levels)
            s += (s.empty() ? "" : "/") + std::to_string(l.communities());
        return s;
    }());
}

void Pipeline::fit_gravity(bool required)
{
    const auto net = read_network(need_artifact(kNodes, Stage::Network), need_artifact(kEdges, Stage::Network));
    if (!config_.fit.capitals && !required) {
        info("fit", "gravity fit skipped: fit.capitals is not set");
        return;
    }
    const auto distances = capital_distances(read_capitals(need_input(config_.fit.capitals, "fit.capitals")));
    json j;
    j["min_distance_km"] = config_.fit.min_distance_km;

    // raw user flows against resident user counts
    std::map<std::string, double> residents;
    for (const auto& n : net.nodes)
        residents[n.code] = static_cast<double>(n.residents);
    j["raw"] = fit_json(geoflow::fit_gravity(net, WeightKind::Raw, residents, distances, config_.fit.min_distance_km));

    if (config_.residence.census) {
        std::map<std::string, double> population;
        for (const auto& [code, e] : read_census(need_input(config_.residence.census, "residence.census")))
            population[code] = static_cast<double>(e.population);
        j["est"] = fit_json(geoflow::fit_gravity(net, WeightKind::Est, population, distances, config_.fit.min_distance_km));
    } else {
        j["est"] = nullptr;
    }
    write_json(config_.out(kGravityFit), j);
    const auto& est = j["est"].is_null() ? j["raw"] : j["est"];
    info("fit", "gravity alpha={} beta={} gamma={} r2={}", num(est["alpha"].get<double>()),
         num(est["beta"].get<double>()), num(est["gamma"].get<double>()), num(est["r2"].get<double>()));
}

void Pipeline::fit_powerlaw()
{
    const auto trajectories = read_trajectories(need_artifact(kCleanEvents, Stage::Clean), config_.workers);
    std::vector<double> disp;
    for (const auto& [_, t] : trajectories) {
        auto d = displacements(t);
        disp.insert(disp.end(), d.begin(), d.end());
    }
    std::vector<double> radii;
    {
        const auto path = need_artifact(kUserMetrics, Stage::Metrics);
        const auto t = read_csv_table(path);
        const auto c = t.column("radius_km");
        for (std::size_t r = 0; r < t.rows.size(); ++r)
            radii.push_back(double_field(t.rows[r][c], path, r));
    }
    const auto& f = config_.fit;
    json j;
    j["displacement"] = {{"samples", disp.size()},
                         {"mle", try_fit([&] { return json(fit_json(fit_tail(disp, f.displacement_xmin_km, f.xmax_km))); })},
                         {"binned", try_fit([&] {
                              return json(fit_json(binned_power_law(disp, f.displacement_xmin_km, f.log_bin_base)));
                          })}};
    j["gyration"] = {{"samples", radii.size()},
                     {"mle", try_fit([&] { return json(fit_json(fit_tail(radii, f.gyration_xmin_km, f.xmax_km))); })},
                     {"binned", try_fit([&] {
                          return json(fit_json(binned_power_law(radii, f.gyration_xmin_km, f.log_bin_base)));
                      })}};

    // penetration against GDP per capita over the included countries
    const auto stats = read_country_stats(need_artifact(kCountryStats, Stage::Residence));
    std::vector<double> gdp, pen;
    for (const auto& [_, s] : stats)
        if (s.included && s.gdp_per_capita && *s.gdp_per_capita > 0 && s.penetration > 0) {
            gdp.push_back(*s.gdp_per_capita);
            pen.push_back(s.penetration);
        }
    j["penetration_vs_gdp"] = gdp.size() >= 3 ? try_fit([&] { return json(fit_json(loglog_regression(gdp, pen))); })
                                              : json{{"error", "fewer than 3 included countries with GDP"}};
    write_json(config_.out(kPowerlawFit), j);
    const auto& mle = j["displacement"]["mle"];
    if (mle.contains("exponent"))
        info("fit", "displacement exponent {} over {} samples", num(mle["exponent"].get<double>()), disp.size());
    else
        info("fit", "displacement fit failed: {}", mle["error"].get<std::string>());
}

void Pipeline::fit()
{
    fit_gravity(false);
    fit_powerlaw();
}

void Pipeline::validate()
{
    const auto reference = read_reference_stats(need_input(config_.validate.reference, "validate.reference"));
    const auto net = read_network(need_artifact(kNodes, Stage::Network), need_artifact(kEdges, Stage::Network));
    std::map<std::string, double> inflow;
    for (const auto& b : inflow_outflow_balance(net, WeightKind::Est))
        inflow[b.country] = b.inflow;
    json j;
    j["estimate"] = "est inflow (balance.csv)";
    j["arrivals_thousands"] = try_fit([&] { return validation_json(validate_external(inflow, reference.arrivals_thousands)); });
    j["receipts_musd"] = try_fit([&] { return validation_json(validate_external(inflow, reference.receipts_musd)); });
    write_json(config_.out(kValidation), j);
    info("validate", "arrivals r2={} receipts r2={}", j["arrivals_thousands"].value("r2", 0.0),
         j["receipts_musd"].value("r2", 0.0));
}

void Pipeline::report()
{
    json r;
    auto kv_section = [&](const char* file, Stage producer) {
        json s;
        s["source"] = file;
        for (const auto& [k, v] : read_key_values(need_artifact(file, producer)))
            s[k] = number_or_string(v);
        return s;
    };
    r["ingest"] = kv_section(kIngestReport, Stage::Ingest);
    r["clean"] = kv_section(kCleanSummary, Stage::Clean);

    const auto profiles = read_profiles(need_artifact(kProfiles, Stage::Residence),
                                        need_artifact(kUserCountries, Stage::Residence));
    const auto stats = read_country_stats(need_artifact(kCountryStats, Stage::Residence));
    {
        json s;
        s["source"] = {kProfiles, kCountryStats};
        s["users"] = profiles.size();
        s["countries"] = stats.size();
        s["included_countries"] = std::count_if(stats.begin(), stats.end(), [](const auto& kv) { return kv.second.included; });
        r["residence"] = s;
    }
    {
        const auto path = need_artifact(kMobilityProfiles, Stage::Metrics);
        const auto t = read_csv_table(path);
        json s;
        s["source"] = kMobilityProfiles;
        std::int64_t residents = 0, mobile = 0;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            residents += int_field(t.rows[i][t.column("n_residents")], path, i);
            mobile += int_field(t.rows[i][t.column("n_mobile")], path, i);
        }
        s["residents"] = residents;
        s["mobile"] = mobile;
        s["mobility_rate"] = residents ? static_cast<double>(mobile) / static_cast<double>(residents) : 0.0;
        r["metrics"] = s;

        json daily;
        daily["source"] = {kDailyOutbound, kDailyInbound, kDailyGlobal};
        for (const char* file : {kDailyOutbound, kDailyInbound, kDailyGlobal}) {
            const auto p = need_artifact(file, Stage::Metrics);
            const auto dt = read_csv_table(p);
            std::map<std::string, double> max_norm;
            for (std::size_t i = 0; i < dt.rows.size(); ++i) {
                auto& m = max_norm[dt.rows[i][dt.column("country")]];
                m = std::max(m, double_field(dt.rows[i][dt.column("normalized")], p, i));
            }
            const bool ok = std::all_of(max_norm.begin(), max_norm.end(),
                                        [](const auto& kv) { return kv.second == 100.0 || kv.second == 0.0; });
            daily[file] = {{"series", max_norm.size()}, {"max_normalized_is_100_or_0", ok}};
        }
        r["daily"] = daily;
    }
    {
        json s = kv_section(kNetworkSummary, Stage::Network);
        s["source"] = {kNetworkSummary, kEdges, kBalance};
        const auto path = need_artifact(kBalance, Stage::Network);
        const auto t = read_csv_table(path);
        std::vector<double> b;
        for (std::size_t i = 0; i < t.rows.size(); ++i)
            b.push_back(double_field(t.rows[i][t.column("balance")], path, i));
        s["balance_sum_from_table"] = exact_sum(b);
        r["network"] = s;
    }
    {
        const auto path = need_artifact(kCommunityLevels, Stage::Communities);
        const auto t = read_csv_table(path);
        json s;
        s["source"] = kCommunityLevels;
        json levels = json::array();
        for (std::size_t i = 0; i < t.rows.size(); ++i)
            levels.push_back({{"level", int_field(t.rows[i][0], path, i)},
                              {"communities", int_field(t.rows[i][1], path, i)},
                              {"modularity", double_field(t.rows[i][2], path, i)}});
        s["levels"] = levels;
        r["communities"] = s;
    }
    if (fs::exists(config_.out(kGravityFit)))
        r["gravity"] = {{"source", kGravityFit}, {"fit", read_json(config_.out(kGravityFit))}};
    r["powerlaw"] = {{"source", kPowerlawFit}, {"fit", read_json(need_artifact(kPowerlawFit, Stage::Fit))}};
    if (fs::exists(config_.out(kValidation)))
        r["validation"] = {{"source", kValidation}, {"fit", read_json(config_.out(kValidation))}};

    if (config_.report.truth_dir) {
        const auto dir = config_.resolve(*config_.report.truth_dir);
        json truth;
        truth["source"] = {kProfiles, kMobilityProfiles, "truth_residences.csv", "truth_countries.csv"};
        {
            const auto path = dir / "truth_residences.csv";
            const auto t = read_csv_table(path);
            std::size_t matched = 0;
            for (const auto& row : t.rows) {
                auto it = profiles.find(row[t.column("user_id")]);
                matched += it != profiles.end() && it->second.residence == row[t.column("residence")];
            }
            truth["planted_users"] = t.rows.size();
            truth["residences_recovered"] = matched;
            truth["residence_recovery"] = t.rows.empty() ? 1.0 : double(matched) / double(t.rows.size());
        }
        {
            const auto tpath = dir / "truth_countries.csv";
            const auto tc = read_csv_table(tpath);
            std::map<std::string, double> planted;
            for (std::size_t i = 0; i < tc.rows.size(); ++i)
                planted[tc.rows[i][tc.column("code")]] = double_field(tc.rows[i][tc.column("trip_rate")], tpath, i);
            const auto mpath = config_.out(kMobilityProfiles);
            const auto mt = read_csv_table(mpath);
            json rows = json::array();
            bool all_within = true;
            for (std::size_t i = 0; i < mt.rows.size(); ++i) {
                const auto& code = mt.rows[i][mt.column("country")];
                if (!planted.count(code))
                    continue;
                const double p = planted[code];
                const double n = double_field(mt.rows[i][mt.column("n_residents")], mpath, i);
                const double rate = double_field(mt.rows[i][mt.column("mobility_rate")], mpath, i);
                const double sigma = std::sqrt(p * (1.0 - p) / n);
                const bool within = std::abs(rate - p) <= 3.0 * sigma;
                all_within = all_within && within;
                rows.push_back({{"country", code}, {"planted", p}, {"observed", rate}, {"sigma", sigma},
                                {"within_3_sigma", within}});
            }
            truth["mobility_rates"] = rows;
            truth["mobility_rates_within_3_sigma"] = all_within;
        }
        r["truth"] = truth;
    }
    write_json(config_.out(kReport), r);
    info("report", "written to {}", config_.out(kReport).string());
}

void Pipeline::synth()
{
    const auto& s = config_.synth;
    WorldOptions wo;
    wo.countries = s.countries;
    wo.blocks = s.blocks;
    wo.pop_min = s.pop_min;
    wo.pop_max = s.pop_max;
    wo.min_separation_km = s.min_separation_km;
    wo.users_per_country = s.users_per_country;
    wo.gravity = {s.gravity_a, s.alpha, s.beta, s.gamma};
    wo.block_boost = s.block_boost;
    const auto world = make_world(config_.seed, wo);

    EventOptions eo;
    eo.events_per_user = s.events_per_user;
    eo.trip_rate = s.trip_rate;
    eo.year = config_.metrics.year;
    eo.workers = config_.workers;
    const auto out = generate_events(world, eo);

    const auto dir = config_.resolve(s.output_dir);
    {
        auto f = open_output(dir / "events.csv");
        write_events(f, out.events);
    }
    write_truth(world, out, dir);
    if (s.levy_users > 0) {
        LevyOptions lo;
        lo.users = s.levy_users;
        lo.events_per_user = s.levy_events_per_user;
        lo.exponent = s.levy_exponent;
        lo.xmin_km = s.levy_xmin_km;
        lo.xmax_km = s.levy_xmax_km;
        lo.year = config_.metrics.year;
        const auto levy = generate_levy_events(world, lo);
        auto f = open_output(dir / "levy_events.csv");
        write_events(f, levy);
    }
    info("synth", "{} countries, {} users, {} events -> {}", world.countries.size(), out.users.size(),
         out.events.size(), dir.string());
}

void Pipeline::run_stage(Stage stage)
{
    switch (stage) {
    case Stage::Ingest:
        return ingest();
    case Stage::Clean:
        return clean();
    case Stage::Residence:
        return residence();
    case Stage::Metrics:
        return metrics();
    case Stage::Network:
        return network();
    case Stage::Communities:
        return communities();
    case Stage::Fit:
        return fit();
    }
}

void Pipeline::run_all()
{
    for (Stage s : kAllStages)
        run_stage(s);
    report();
}

} // namespace geoflow
