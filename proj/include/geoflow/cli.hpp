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
#ifndef GEOFLOW_CLI_HPP
#define GEOFLOW_CLI_HPP

#include <ostream>

namespace geoflow
{

/// Process exit statuses of the geoflow command.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,    ///< unexpected internal error
    kExitUsage = 2,      ///< bad command line
    kExitConfig = 3,     ///< malformed or missing config key
    kExitInput = 4,      ///< missing or unreadable input file
    kExitStageOrder = 5, ///< a stage ran before its predecessor
    kExitData = 6,       ///< invalid data or an impossible computation
};

/// Entry point of the geoflow command; returns the exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace geoflow

#endif
