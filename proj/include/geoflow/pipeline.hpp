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
#ifndef GEOFLOW_PIPELINE_HPP
#define GEOFLOW_PIPELINE_HPP

#include "geoflow/config.hpp"
#include "geoflow/ingest.hpp"
#include "geoflow/network.hpp"
#include "geoflow/residence.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace geoflow
{

enum class Stage { Ingest, Clean, Residence, Metrics, Network, Communities, Fit };

inline constexpr Stage kAllStages[] = {Stage::Ingest,  Stage::Clean,       Stage::Residence, Stage::Metrics,
                                       Stage::Network, Stage::Communities, Stage::Fit};

std::string stage_name(Stage stage);
/// Accepts the stage names plus "profile" for the residence stage.
std::optional<Stage> parse_stage(const std::string& name);

/// Readers for the artifacts the stages emit.
TrajectoryMap read_trajectories(const std::filesystem::path& events_csv, unsigned workers = 1);
ProfileMap read_profiles(const std::filesystem::path& profiles_csv, const std::filesystem::path& user_countries_csv);
CountryStatsMap read_country_stats(const std::filesystem::path& country_stats_csv);
FlowNetwork read_network(const std::filesystem::path& nodes_csv, const std::filesystem::path& edges_csv);

/// "YYYY-MM-DD" for a day count since 1970-01-01.
std::string iso_date(std::int64_t days);

/// Stage runner over the artifact directory config.output_dir. Each stage
/// reads its predecessor's files and throws StageOrderError when they are
/// absent.
class Pipeline
{
public:
    explicit Pipeline(Config config, std::ostream* log = nullptr);

    void ingest();
    void clean();
    void residence();
    void metrics();
    void network();
    void communities();
    /// Gravity fits; with required == false a missing capitals file skips
    /// the fit instead of failing.
    void fit_gravity(bool required = true);
    void fit_powerlaw();
    void fit();
    void validate();
    void report();
    void synth();

    void run_stage(Stage stage);
    /// All stages in order, then the report.
    void run_all();

    const Config& config() const { return config_; }

private:
    Config config_;
    std::ostream* log_;

    template <class... Args>
    void info(const char* stage, const char* fmt, Args&&... args);
    std::filesystem::path need_artifact(const std::string& name, Stage producer) const;
    std::filesystem::path need_input(const std::optional<std::filesystem::path>& p, const std::string& key) const;
};

} // namespace geoflow

#endif
