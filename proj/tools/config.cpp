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
#include "geoflow/config.hpp"
#include "geoflow/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace geoflow
{

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace
{

json opt_path(const std::optional<fs::path>& p)
{
    return p ? json(p->generic_string()) : json(nullptr);
}

json opt_double(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

class Reader
{
public:
    explicit Reader(const json& root) : root_(root) {}

    const json& at(const std::string& section, const std::string& key) const
    {
        return section.empty() ? root_.at(key) : root_.at(section).at(key);
    }

    static std::string name(const std::string& section, const std::string& key)
    {
        return section.empty() ? key : section + "." + key;
    }

    double number(const std::string& s, const std::string& k) const
    {
        const auto& v = at(s, k);
        if (!v.is_number())
            throw ConfigError(fmt::format("config key '{}' must be a number", name(s, k)));
        return v.get<double>();
    }

    std::int64_t integer(const std::string& s, const std::string& k) const
    {
        const auto& v = at(s, k);
        if (!v.is_number_integer())
            throw ConfigError(fmt::format("config key '{}' must be an integer", name(s, k)));
        return v.get<std::int64_t>();
    }

    bool boolean(const std::string& s, const std::string& k) const
    {
        const auto& v = at(s, k);
        if (!v.is_boolean())
            throw ConfigError(fmt::format("config key '{}' must be true or false", name(s, k)));
        return v.get<bool>();
    }

    std::string string(const std::string& s, const std::string& k) const
    {
        const auto& v = at(s, k);
        if (!v.is_string())
            throw ConfigError(fmt::format("config key '{}' must be a string", name(s, k)));
        return v.get<std::string>();
    }

    std::optional<fs::path> path(const std::string& s, const std::string& k) const
    {
        const auto& v = at(s, k);
        if (v.is_null())
            return std::nullopt;
        if (!v.is_string() || v.get<std::string>().empty())
            throw ConfigError(fmt::format("config key '{}' must be a path string or null", name(s, k)));
        return fs::path(v.get<std::string>());
    }

    std::optional<double> optional_number(const std::string& s, const std::string& k) const
    {
        if (at(s, k).is_null())
            return std::nullopt;
        return number(s, k);
    }

    std::string choice(const std::string& s, const std::string& k, std::initializer_list<const char*> allowed) const
    {
        auto v = string(s, k);
        for (const char* a : allowed)
            if (v == a)
                return v;
        std::string list;
        for (const char* a : allowed)
            list += (list.empty() ? "" : ", ") + std::string(a);
        throw ConfigError(fmt::format("config key '{}' must be one of: {}", name(s, k), list));
    }

private:
    const json& root_;
};

void require(bool ok, const std::string& key, const std::string& what)
{
    if (!ok)
        throw ConfigError(fmt::format("config key '{}' {}", key, what));
}

void merge_file(json& target, const json& file)
{
    if (!file.is_object())
        throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : file.items()) {
        if (!target.contains(key))
            throw ConfigError(fmt::format("unknown config key '{}'", key));
        auto& slot = target[key];
        if (!slot.is_object()) {
            slot = value;
            continue;
        }
        if (!value.is_object())
            throw ConfigError(fmt::format("config section '{}' must be an object", key));
        for (const auto& [sub, v] : value.items()) {
            if (!slot.contains(sub))
                throw ConfigError(fmt::format("unknown config key '{}.{}'", key, sub));
            slot[sub] = v;
        }
    }
}

json env_value(const json& current, const std::string& raw)
{
    if (current.is_string())
        return raw;
    json parsed = json::parse(raw, nullptr, false);
    return parsed.is_discarded() ? json(raw) : parsed;
}

void merge_env(json& target, const EnvLookup& env)
{
    for (auto& [key, slot] : target.items()) {
        if (slot.is_object()) {
            for (auto& [sub, v] : slot.items())
                if (auto raw = env(env_name(key, sub)))
                    v = env_value(v, *raw);
        } else if (auto raw = env(env_name("", key))) {
            slot = env_value(slot, *raw);
        }
    }
}

Config from_json(const json& j, const fs::path& base_dir)
{
    const Reader r(j);
    Config c;
    c.base_dir = base_dir;
    {
        const auto& s = j.at("seed");
        require(s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0), "seed",
                "must be a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    const auto workers = r.integer("", "workers");
    require(workers >= 1 && workers <= 1024, "workers", "must be in [1, 1024]");
    c.workers = static_cast<unsigned>(workers);
    {
        auto out = r.path("", "output_dir");
        require(out.has_value(), "output_dir", "must be set");
        c.output_dir = *out;
    }

    c.ingest.events = r.path("ingest", "events");
    c.ingest.boundaries = r.path("ingest", "boundaries");

    c.clean.max_speed_kmh = r.number("clean", "max_speed_kmh");
    require(c.clean.max_speed_kmh > 0, "clean.max_speed_kmh", "must be positive");
    c.clean.source_coverage = r.number("clean", "source_coverage");
    require(c.clean.source_coverage > 0 && c.clean.source_coverage <= 1, "clean.source_coverage",
            "must be in (0, 1]");
    c.clean.popularity_weight = r.choice("clean", "popularity_weight", {"users", "events"});

    c.residence.census = r.path("residence", "census");
    c.residence.min_penetration = r.number("residence", "min_penetration");
    require(c.residence.min_penetration >= 0, "residence.min_penetration", "must be >= 0");
    c.residence.min_residents = r.integer("residence", "min_residents");
    require(c.residence.min_residents >= 0, "residence.min_residents", "must be >= 0");

    c.metrics.year = static_cast<int>(r.integer("metrics", "year"));
    require(c.metrics.year >= 1970 && c.metrics.year <= 9999, "metrics.year", "must be in [1970, 9999]");
    c.metrics.radius_population = r.choice("metrics", "radius_population", {"all", "mobile"});
    c.metrics.figures = r.boolean("metrics", "figures");

    c.network.min_outgoing = r.integer("network", "min_outgoing");
    require(c.network.min_outgoing >= 0, "network.min_outgoing", "must be >= 0");
    c.network.min_penetration = r.number("network", "min_penetration");
    require(c.network.min_penetration >= 0, "network.min_penetration", "must be >= 0");
    c.network.min_residents = r.integer("network", "min_residents");
    require(c.network.min_residents >= 0, "network.min_residents", "must be >= 0");
    c.network.top_k = static_cast<int>(r.integer("network", "top_k"));
    require(c.network.top_k >= 0, "network.top_k", "must be >= 0");

    c.communities.weights = r.choice("communities", "weights", {"est", "raw"});
    c.communities.symmetrize = r.boolean("communities", "symmetrize");
    c.communities.restarts = static_cast<int>(r.integer("communities", "restarts"));
    require(c.communities.restarts >= 1, "communities.restarts", "must be >= 1");
    c.communities.max_levels = static_cast<int>(r.integer("communities", "max_levels"));
    require(c.communities.max_levels >= 1 && c.communities.max_levels <= 16, "communities.max_levels",
            "must be in [1, 16]");

    c.fit.capitals = r.path("fit", "capitals");
    c.fit.min_distance_km = r.number("fit", "min_distance_km");
    require(c.fit.min_distance_km >= 0, "fit.min_distance_km", "must be >= 0");
    c.fit.displacement_xmin_km = r.number("fit", "displacement_xmin_km");
    require(c.fit.displacement_xmin_km > 0, "fit.displacement_xmin_km", "must be positive");
    c.fit.gyration_xmin_km = r.number("fit", "gyration_xmin_km");
    require(c.fit.gyration_xmin_km > 0, "fit.gyration_xmin_km", "must be positive");
    c.fit.xmax_km = r.optional_number("fit", "xmax_km");
    c.fit.log_bin_base = r.number("fit", "log_bin_base");
    require(c.fit.log_bin_base > 1, "fit.log_bin_base", "must be > 1");

    c.validate.reference = r.path("validate", "reference");
    c.report.truth_dir = r.path("report", "truth_dir");

    auto& s = c.synth;
    auto synth_out = r.path("synth", "output_dir");
    require(synth_out.has_value(), "synth.output_dir", "must be set");
    s.output_dir = *synth_out;
    s.countries = static_cast<int>(r.integer("synth", "countries"));
    require(s.countries >= 2 && s.countries <= 676, "synth.countries", "must be in [2, 676]");
    s.blocks = static_cast<int>(r.integer("synth", "blocks"));
    require(s.blocks >= 1 && s.blocks <= s.countries, "synth.blocks", "must be in [1, synth.countries]");
    s.users_per_country = r.number("synth", "users_per_country");
    require(s.users_per_country >= 1, "synth.users_per_country", "must be >= 1");
    s.events_per_user = static_cast<int>(r.integer("synth", "events_per_user"));
    require(s.events_per_user >= 1, "synth.events_per_user", "must be >= 1");
    s.trip_rate = r.number("synth", "trip_rate");
    require(s.trip_rate >= 0 && s.trip_rate <= 1, "synth.trip_rate", "must be in [0, 1]");
    s.pop_min = r.number("synth", "pop_min");
    s.pop_max = r.number("synth", "pop_max");
    require(s.pop_min > 0 && s.pop_max >= s.pop_min, "synth.pop_min", "must satisfy 0 < pop_min <= pop_max");
    s.min_separation_km = r.number("synth", "min_separation_km");
    require(s.min_separation_km >= 1, "synth.min_separation_km", "must be >= 1");
    s.gravity_a = r.number("synth", "gravity_a");
    require(s.gravity_a > 0, "synth.gravity_a", "must be positive");
    s.alpha = r.number("synth", "alpha");
    s.beta = r.number("synth", "beta");
    s.gamma = r.number("synth", "gamma");
    s.block_boost = r.number("synth", "block_boost");
    require(s.block_boost >= 1, "synth.block_boost", "must be >= 1");
    s.levy_users = static_cast<int>(r.integer("synth", "levy_users"));
    require(s.levy_users >= 0, "synth.levy_users", "must be >= 0");
    s.levy_events_per_user = static_cast<int>(r.integer("synth", "levy_events_per_user"));
    require(s.levy_events_per_user >= 1, "synth.levy_events_per_user", "must be >= 1");
    s.levy_exponent = r.number("synth", "levy_exponent");
    require(s.levy_exponent > 1, "synth.levy_exponent", "must be > 1");
    s.levy_xmin_km = r.number("synth", "levy_xmin_km");
    s.levy_xmax_km = r.number("synth", "levy_xmax_km");
    require(s.levy_xmin_km > 0 && s.levy_xmax_km > s.levy_xmin_km, "synth.levy_xmin_km",
            "must satisfy 0 < levy_xmin_km < levy_xmax_km");
    return c;
}

} // namespace

fs::path Config::resolve(const fs::path& p) const
{
    return p.is_absolute() ? p : base_dir / p;
}

std::optional<std::string> process_env(const std::string& name)
{
    if (const char* v = std::getenv(name.c_str()))
        return std::string(v);
    return std::nullopt;
}

std::string env_name(const std::string& section, const std::string& key)
{
    std::string name = "GEOFLOW_";
    if (!section.empty())
        name += section + "_";
    name += key;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
    return name;
}

json config_to_json(const Config& c)
{
    json j;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir.generic_string();
    j["ingest"] = {{"events", opt_path(c.ingest.events)}, {"boundaries", opt_path(c.ingest.boundaries)}};
    j["clean"] = {{"max_speed_kmh", c.clean.max_speed_kmh},
                  {"source_coverage", c.clean.source_coverage},
                  {"popularity_weight", c.clean.popularity_weight}};
    j["residence"] = {{"census", opt_path(c.residence.census)},
                      {"min_penetration", c.residence.min_penetration},
                      {"min_residents", c.residence.min_residents}};
    j["metrics"] = {{"year", c.metrics.year},
                    {"radius_population", c.metrics.radius_population},
                    {"figures", c.metrics.figures}};
    j["network"] = {{"min_outgoing", c.network.min_outgoing},
                    {"min_penetration", c.network.min_penetration},
                    {"min_residents", c.network.min_residents},
                    {"top_k", c.network.top_k}};
    j["communities"] = {{"weights", c.communities.weights},
                        {"symmetrize", c.communities.symmetrize},
                        {"restarts", c.communities.restarts},
                        {"max_levels", c.communities.max_levels}};
    j["fit"] = {{"capitals", opt_path(c.fit.capitals)},
                {"min_distance_km", c.fit.min_distance_km},
                {"displacement_xmin_km", c.fit.displacement_xmin_km},
                {"gyration_xmin_km", c.fit.gyration_xmin_km},
                {"xmax_km", opt_double(c.fit.xmax_km)},
                {"log_bin_base", c.fit.log_bin_base}};
    j["validate"] = {{"reference", opt_path(c.validate.reference)}};
    j["report"] = {{"truth_dir", opt_path(c.report.truth_dir)}};
    const auto& s = c.synth;
    j["synth"] = {{"output_dir", s.output_dir.generic_string()},
                  {"countries", s.countries},
                  {"blocks", s.blocks},
                  {"users_per_country", s.users_per_country},
                  {"events_per_user", s.events_per_user},
                  {"trip_rate", s.trip_rate},
                  {"pop_min", s.pop_min},
                  {"pop_max", s.pop_max},
                  {"min_separation_km", s.min_separation_km},
                  {"gravity_a", s.gravity_a},
                  {"alpha", s.alpha},
                  {"beta", s.beta},
                  {"gamma", s.gamma},
                  {"block_boost", s.block_boost},
                  {"levy_users", s.levy_users},
                  {"levy_events_per_user", s.levy_events_per_user},
                  {"levy_exponent", s.levy_exponent},
                  {"levy_xmin_km", s.levy_xmin_km},
                  {"levy_xmax_km", s.levy_xmax_km}};
    return j;
}

json default_config_json()
{
    return config_to_json(Config{});
}

Config parse_config(const std::string& text, const fs::path& base_dir, const EnvLookup& env)
{
    json j = default_config_json();
    json file = json::parse(text, nullptr, false);
    if (file.is_discarded())
        throw ConfigError("config is not valid JSON");
    merge_file(j, file);
    merge_env(j, env);
    return from_json(j, base_dir);
}

Config load_config(const fs::path& path, const EnvLookup& env)
{
    std::ifstream in(path);
    if (!in)
        throw InputError(fmt::format("cannot open config file '{}'", path.string()));
    std::ostringstream text;
    text << in.rdbuf();
    auto dir = path.parent_path();
    if (dir.empty())
        dir = ".";
    return parse_config(text.str(), dir, env);
}

Config default_config(const EnvLookup& env)
{
    return parse_config("{}", ".", env);
}

} // namespace geoflow
