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
#ifndef GEOFLOW_SYNTH_HPP
#define GEOFLOW_SYNTH_HPP

#include "geoflow/geo.hpp"
#include "geoflow/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace geoflow
{

struct GravityParams {
    double a = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
};

struct SynthCountry {
    std::string code;
    double population = 0.0;
    LatLon capital;
    double penetration = 0.0; ///< resident users / population
    int block = 0;
};

struct SynthWorld {
    std::vector<SynthCountry> countries; ///< sorted by code
    GravityParams gravity;
    double block_boost = 1.0;
    std::uint64_t seed = 0;

    /// Number of users generated for country i.
    std::int64_t users(std::size_t i) const;
};

struct WorldOptions {
    int countries = 12;
    int blocks = 3;
    double pop_min = 1e6; ///< populations are log-uniform in [pop_min, pop_max]
    double pop_max = 1e8;
    double min_separation_km = 200.0;
    double max_abs_lat = 60.0;
    double users_per_country = 100.0; ///< sets the planted penetrations
    double penetration_jitter = 0.25; ///< relative spread of users per country
    GravityParams gravity;
    double block_boost = 1.0;
};

/// Two-letter synthetic code for index i: 0 -> "AA", 1 -> "AB", ...
std::string synth_code(std::size_t i);

/// Random world: capitals by rejection sampling with the minimum separation,
/// countries assigned to blocks round-robin after a seeded shuffle.
SynthWorld make_world(std::uint64_t seed, const WorldOptions& options = {});

/// Checks the world invariants; throws DataError.
void validate_world(const SynthWorld& world);

/// F_ij = A p_i^alpha p_j^beta / r_ij^gamma, times block_boost inside a block.
/// Zero diagonal. Throws DataError when two capitals are closer than 1 km.
std::vector<std::vector<double>> expected_flows(const SynthWorld& world);

/// Per-country probability that a user travels: proportional to the
/// country's per-capita expected outflow, scaled so the largest is max_rate.
/// Raw distinct-user flows divided by penetration then follow expected_flows.
std::vector<double> country_trip_rates(const SynthWorld& world, double max_rate);

struct EventOptions {
    int events_per_user = 50; ///< users get uniform counts in [n/2, 3n/2]
    double trip_rate = 0.3;   ///< see country_trip_rates
    int year = 2012;
    double home_radius_km = 50.0;
    double jitter_sigma_km = 10.0;
    unsigned workers = 1;
};

struct SynthUser {
    std::string user_id;
    std::string residence;
    std::string destination; ///< empty for users who stay home
    int foreign_events = 0;
};

struct SynthOutput {
    std::vector<GeoEvent> events; ///< grouped by user, time ordered
    std::vector<SynthUser> users;
    std::vector<double> trip_rates; ///< per country, world order
};

/// Labelled event stream for the world. Each user has a home majority near
/// the capital of the residence country and at most one contiguous foreign
/// trip whose destination is drawn from the residence row of expected_flows.
/// Output does not depend on the worker count.
SynthOutput generate_events(const SynthWorld& world, const EventOptions& options = {});

struct LevyOptions {
    int users = 1000;
    int events_per_user = 101;
    double exponent = 1.62;
    double xmin_km = 1.0;
    double xmax_km = 1e4;
    int year = 2012;
    double max_speed_kmh = 800.0;
};

/// Walks with power-law jump lengths and uniform bearings, each starting at a
/// random capital. Events are labelled with the nearest capital's country and
/// spaced so that no jump exceeds max_speed_kmh.
std::vector<GeoEvent> generate_levy_events(const SynthWorld& world, const LevyOptions& options = {});

/// Inverse CDF of the power law truncated to [xmin, xmax] at u in [0, 1).
double power_law_quantile(double u, double exponent, double xmin, double xmax);

std::vector<double> sample_power_law(std::uint64_t seed, double exponent, double xmin, double xmax, std::size_t n);

/// Writes census.csv, capitals.csv, truth_residences.csv, truth_blocks.csv,
/// truth_countries.csv and truth_gravity.json into dir.
void write_truth(const SynthWorld& world, const SynthOutput& output, const std::filesystem::path& dir);

} // namespace geoflow

#endif
