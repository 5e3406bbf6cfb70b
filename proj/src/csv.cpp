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
#include "geoflow/csv.hpp"
#include "geoflow/error.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace geoflow
{

std::optional<std::vector<std::string>> split_csv(std::string_view line, char delim)
{
    std::vector<std::string> fields;
    if (line.find('"') == std::string_view::npos) {
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(delim, start)) != std::string_view::npos; start = pos + 1)
            fields.emplace_back(line.substr(start, pos - start));
        fields.emplace_back(line.substr(start));
        return fields;
    }
    std::string cur;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                }
                else {
                    quoted = false;
                }
            }
            else {
                cur.push_back(c);
            }
        }
        else if (c == '"' && cur.empty()) {
            quoted = true;
        }
        else if (c == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
        }
        else {
            cur.push_back(c);
        }
        ++i;
    }
    if (quoted)
        return std::nullopt;
    fields.push_back(std::move(cur));
    return fields;
}

std::string csv_field(std::string_view value, char delim)
{
    if (value.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string_view::npos)
        return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join_csv(const std::vector<std::string>& fields, char delim)
{
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out.push_back(delim);
        out += csv_field(fields[i], delim);
    }
    return out;
}

namespace
{
std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}
} // namespace

std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::optional<std::int64_t> parse_int(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

std::string format_number(double v)
{
    if (v == 0.0)
        return "0"; // folds -0
    return fmt::format("{}", v);
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open input file: " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot open output file: " + path.string());
    return out;
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const
{
    if (auto c = find_column(name))
        return *c;
    throw DataError("missing column '" + std::string(name) + "'");
}

CsvTable read_csv_table(const std::filesystem::path& path, char delim)
{
    auto in = open_input(path);
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_csv(line, delim);
        if (!fields)
            throw DataError(fmt::format("{}:{}: unterminated quote", path.string(), lineno));
        if (!have_header) {
            table.header = std::move(*fields);
            have_header = true;
            continue;
        }
        if (fields->size() != table.header.size())
            throw DataError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), lineno,
                                        table.header.size(), fields->size()));
        table.rows.push_back(std::move(*fields));
    }
    if (!have_header)
        throw DataError("empty table: " + path.string());
    return table;
}

void write_csv_table(const std::filesystem::path& path, const CsvTable& table, char delim)
{
    auto out = open_output(path);
    out << join_csv(table.header, delim) << '\n';
    for (const auto& row : table.rows)
        out << join_csv(row, delim) << '\n';
}

} // namespace geoflow
