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
#ifndef GEOFLOW_CONFIG_HPP
#define GEOFLOW_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

namespace geoflow
{

/// Pipeline configuration. Every threshold has a named key; relative paths
/// are resolved against the directory of the config file.
struct Config {
    std::filesystem::path base_dir;
    std::uint64_t seed = 42;
    unsigned workers = 1;
    std::filesystem::path output_dir = "out";

    struct Ingest {
        std::optional<std::filesystem::path> events;
        std::optional<std::filesystem::path> boundaries;
    } ingest;

    struct Clean {
        double max_speed_kmh = 1000.0;
        double source_coverage = 0.95;
        std::string popularity_weight = "users"; ///< "users" or "events"
    } clean;

    struct Residence {
        std::optional<std::filesystem::path> census;
        double min_penetration = 0.0005;
        std::int64_t min_residents = 10000;
    } residence;

    struct Metrics {
        int year = 2012;
        std::string radius_population = "all"; ///< "all" or "mobile"
        bool figures = false;
    } metrics;

    struct Network {
        std::int64_t min_outgoing = 500;
        double min_penetration = 0.0005;
        std::int64_t min_residents = 0;
        int top_k = 30;
    } network;

    struct Communities {
        std::string weights = "est"; ///< "est" or "raw"
        bool symmetrize = false;
        int restarts = 20;
        int max_levels = 3;
    } communities;

    struct Fit {
        std::optional<std::filesystem::path> capitals;
        double min_distance_km = 100.0;
        double displacement_xmin_km = 1.0;
        double gyration_xmin_km = 1.0;
        std::optional<double> xmax_km; ///< set to use the truncated estimator
        double log_bin_base = 2.0;
    } fit;

    struct Validate {
        std::optional<std::filesystem::path> reference;
    } validate;

    struct Report {
        std::optional<std::filesystem::path> truth_dir;
    } report;

    struct Synth {
        std::filesystem::path output_dir = "synth";
        int countries = 12;
        int blocks = 3;
        double users_per_country = 167.0;
        int events_per_user = 50;
        double trip_rate = 0.3;
        double pop_min = 1e6;
        double pop_max = 1e8;
        double min_separation_km = 200.0;
        double gravity_a = 1.0;
        double alpha = 0.89;
        double beta = 0.69;
        double gamma = 1.1;
        double block_boost = 1.0;
        int levy_users = 0;
        int levy_events_per_user = 101;
        double levy_exponent = 1.62;
        double levy_xmin_km = 1.0;
        double levy_xmax_km = 1e4;
    } synth;

    /// Resolves a configured path against base_dir.
    std::filesystem::path resolve(const std::filesystem::path& p) const;
    std::filesystem::path out(const std::string& artifact) const { return resolve(output_dir) / artifact; }
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Environment variable name for a key, e.g. ("clean", "max_speed_kmh") ->
/// GEOFLOW_CLEAN_MAX_SPEED_KMH; top-level keys use an empty section.
std::string env_name(const std::string& section, const std::string& key);

/// Default configuration as JSON.
nlohmann::ordered_json default_config_json();

/// Parses configuration text (defaults, then file keys, then environment
/// overrides). Unknown keys and ill-typed values throw ConfigError.
Config parse_config(const std::string& text, const std::filesystem::path& base_dir, const EnvLookup& env = process_env);

/// Loads a config file; a missing file throws InputError.
Config load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

/// Config without a file: defaults plus environment, relative to cwd.
Config default_config(const EnvLookup& env = process_env);

nlohmann::ordered_json config_to_json(const Config& config);

} // namespace geoflow

#endif
