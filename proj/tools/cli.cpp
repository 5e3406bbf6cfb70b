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
#include "geoflow/cli.hpp"
#include "geoflow/config.hpp"
#include "geoflow/error.hpp"
#include "geoflow/pipeline.hpp"

#include <functional>
#include <map>

#include <CLI11.hpp>

namespace geoflow
{

namespace
{

const char* kFooter = R"(Exit status:
  0  success
  1  unexpected internal error
  2  bad command line
  3  config error (malformed JSON, unknown key, bad value, required key unset)
  4  missing or unreadable input file
  5  stage-order violation (a predecessor stage's artifacts are missing)
  6  data error (invalid records, degenerate fit, ...)

Every config key can be overridden with an environment variable named
GEOFLOW_<SECTION>_<KEY>, for example GEOFLOW_CLEAN_MAX_SPEED_KMH=900 or
GEOFLOW_SEED=7 for top-level keys. Values are parsed as JSON when possible.

Stages (in order): ingest, clean, residence (alias profile), metrics,
network, communities, fit.)";

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"geoflow: country-level mobility analysis of geo-located event streams", "geoflow"};
    app.footer(kFooter);
    app.require_subcommand(1);

    std::string config_path;
    bool quiet = false;
    bool figures = false;
    std::string stage;
    std::string synth_out;

    app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_flag("-q,--quiet", quiet, "suppress progress messages");

    std::map<CLI::App*, std::function<void(Pipeline&)>> actions;
    auto add = [&](const char* name, const char* help, std::function<void(Pipeline&)> action) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        actions[sub] = std::move(action);
        return sub;
    };
    add("ingest", "parse events, label countries, write events.csv", [](Pipeline& p) { p.ingest(); });
    add("clean", "speed and source filters, write clean_events.csv", [](Pipeline& p) { p.clean(); });
    add("profile", "assign residences and country statistics", [](Pipeline& p) { p.residence(); });
    add("metrics", "mobility profiles, gyration radii, daily series", [](Pipeline& p) { p.metrics(); })
        ->add_flag("--figures", figures, "also write plot-ready tables under figures/");
    add("network", "country flow network, balances, top flows", [](Pipeline& p) { p.network(); });
    add("communities", "hierarchical modularity partition", [](Pipeline& p) { p.communities(); });
    add("fit-gravity", "gravity model fits", [](Pipeline& p) { p.fit_gravity(true); });
    add("fit-powerlaw", "displacement and gyration power-law fits", [](Pipeline& p) { p.fit_powerlaw(); });
    add("validate", "correlate estimated inflows with reference statistics", [](Pipeline& p) { p.validate(); });
    add("report", "aggregate summary in report.json", [](Pipeline& p) { p.report(); });
    auto* synth = add("synth", "generate a synthetic world with truth files", [](Pipeline& p) { p.synth(); });
    synth->add_option("--out", synth_out, "output directory (overrides synth.output_dir)");
    auto* run = add("run", "all stages in order, then the report", [&](Pipeline& p) {
        if (stage.empty()) {
            p.run_all();
            return;
        }
        p.run_stage(*parse_stage(stage));
    });
    run->add_option("--stage", stage, "run only this stage")->check([](const std::string& s) {
        return parse_stage(s) ? std::string() : "unknown stage '" + s + "'";
    });
    run->add_flag("--figures", figures, "also write plot-ready tables under figures/");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        Config config = config_path.empty() ? default_config() : load_config(config_path);
        if (figures)
            config.metrics.figures = true;
        if (!synth_out.empty())
            config.synth.output_dir = std::filesystem::absolute(synth_out);
        Pipeline pipeline(std::move(config), quiet ? nullptr : &err);
        for (auto* sub : app.get_subcommands())
            actions.at(sub)(pipeline);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "geoflow: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InputError& e) {
        err << "geoflow: input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const StageOrderError& e) {
        err << "geoflow: stage order: " << e.what() << '\n';
        return kExitStageOrder;
    } catch (const DataError& e) {
        err << "geoflow: data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "geoflow: error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace geoflow
