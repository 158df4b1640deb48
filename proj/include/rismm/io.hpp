// SPDX-License-Identifier: Apache-2.0
//
// CSV emission/parsing and the key-value config format.

#pragma once

#include <map>
#include <string>
#include <vector>

namespace rismm {

inline constexpr const char* kCsvSchema = "rismm-csv-1";

/// Comma-separated table with leading '#' comment lines. The first comment
/// always stamps the schema version. Comment lines are not part of the
/// deterministic body (wall-time style metadata goes there).
struct CsvTable {
    std::vector<std::string> comments; // without the leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string csv_to_string(const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

/// Non-comment lines of a CSV file (the deterministic body).
std::string csv_body(const std::string& text);

std::string fmt_double(double v);
std::string fmt_int(long long v);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

/// `key = value` pairs, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_key_values(const std::string& text);

bool kv_has(const std::map<std::string, std::string>& kv, const std::string& key);
std::string kv_get(const std::map<std::string, std::string>& kv, const std::string& key,
                   const std::string& fallback);
double kv_get_double(const std::map<std::string, std::string>& kv, const std::string& key,
                     double fallback);
long long kv_get_int(const std::map<std::string, std::string>& kv, const std::string& key,
                     long long fallback);
bool kv_get_bool(const std::map<std::string, std::string>& kv, const std::string& key,
                 bool fallback);
std::vector<double> kv_get_list(const std::map<std::string, std::string>& kv,
                                const std::string& key, const std::vector<double>& fallback);

} // namespace rismm
