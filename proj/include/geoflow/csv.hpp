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
#ifndef GEOFLOW_CSV_HPP
#define GEOFLOW_CSV_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geoflow
{

/// Splits one delimited line. Fields may be double-quoted, with "" as an
/// escaped quote. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line, char delim = ',');

/// Quotes a field when it contains the delimiter, a quote or a line break.
std::string csv_field(std::string_view value, char delim = ',');

std::string join_csv(const std::vector<std::string>& fields, char delim = ',');

/// Strict numeric parsing: the whole field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Shortest decimal representation that round-trips.
std::string format_number(double v);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

/// A small in-memory delimited table with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws DataError when absent.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
};

/// Reads a header + rows table. Blank lines are skipped; a row with the
/// wrong field count is a DataError naming the file and line.
CsvTable read_csv_table(const std::filesystem::path& path, char delim = ',');

void write_csv_table(const std::filesystem::path& path, const CsvTable& table, char delim = ',');

} // namespace geoflow

#endif
