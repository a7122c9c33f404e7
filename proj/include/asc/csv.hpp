// Copyright 2026 The asckit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace asc::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;

  /// Index of a header column, or npos when absent.
  std::size_t column(std::string_view name) const;
};

/// Parses RFC 4180 CSV (quoted fields, doubled quotes, CRLF or LF). Every row
/// must have as many fields as the header.
Table parse(std::string_view text, const std::string& source_name = "<csv>");
Table read(const std::filesystem::path& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, const std::string& context);

/// Writes text to path, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace asc::csv
