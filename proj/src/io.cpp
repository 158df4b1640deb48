// SPDX-License-Identifier: Apache-2.0

#include "rismm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rismm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string csv_to_string(const CsvTable& table) {
    std::ostringstream os;
    os << "# schema=" << kCsvSchema << '\n';
    for (const auto& c : table.comments) os << "# " << c << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        os << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? "," : "");
        os << '\n';
    }
    return os.str();
}

void write_csv(const std::string& path, const CsvTable& table) {
    write_text_file(path, csv_to_string(table));
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream is(text);
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string c = trim(line.substr(1));
            if (c.rfind("schema=", 0) == 0) continue;
            table.comments.push_back(c);
            continue;
        }
        if (!have_header) {
            table.columns = split(line, ',');
            have_header = true;
        } else {
            table.add_row(split(line, ','));
        }
    }
    return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

std::string csv_body(const std::string& text) {
    std::istringstream is(text);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] == '#') continue;
        os << line << '\n';
    }
    return os.str();
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_int(long long v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << contents;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

bool kv_has(const std::map<std::string, std::string>& kv, const std::string& key) {
    return kv.count(key) > 0;
}

std::string kv_get(const std::map<std::string, std::string>& kv, const std::string& key,
                   const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double kv_get_double(const std::map<std::string, std::string>& kv, const std::string& key,
                     double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    return std::stod(it->second);
}

long long kv_get_int(const std::map<std::string, std::string>& kv, const std::string& key,
                     long long fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    return std::stoll(it->second);
}

bool kv_get_bool(const std::map<std::string, std::string>& kv, const std::string& key,
                 bool fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const std::string v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> kv_get_list(const std::map<std::string, std::string>& kv,
                                const std::string& key, const std::vector<double>& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::vector<double> out;
    for (const auto& tok : split(it->second, ','))
        if (!trim(tok).empty()) out.push_back(std::stod(trim(tok)));
    return out;
}

} // namespace rismm
