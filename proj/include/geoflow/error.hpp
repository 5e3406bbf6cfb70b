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
#ifndef GEOFLOW_ERROR_HPP
#define GEOFLOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace geoflow
{

/// Input data violates a module precondition (degenerate fit, bad geometry, ...).
class DataError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A required input file is missing or unreadable.
class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration value.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A pipeline stage was requested before its predecessor produced output.
class StageOrderError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace geoflow

#endif
