#include "tfg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tfg/errors.hpp"

namespace tfg::cli {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        map[key] = trim(line.substr(eq + 1));
    }
    return map;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string dump_config(const ConfigMap& map) {
    std::string out;
    for (const auto& [k, v] : map) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

double get_double(const ConfigMap& map, const std::string& key, double fallback) {
    const auto it = map.find(key);
    if (it == map.end()) return fallback;
    try {
        size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + it->second);
    }
}

int get_int(const ConfigMap& map, const std::string& key, int fallback) {
    return static_cast<int>(get_long(map, key, fallback));
}

long long get_long(const ConfigMap& map, const std::string& key, long long fallback) {
    const auto it = map.find(key);
    if (it == map.end()) return fallback;
    try {
        size_t used = 0;
        const long long v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: " + it->second);
    }
}

bool get_bool(const ConfigMap& map, const std::string& key, bool fallback) {
    const auto it = map.find(key);
    if (it == map.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false");
}

std::string get_string(const ConfigMap& map, const std::string& key, std::string fallback) {
    const auto it = map.find(key);
    return it == map.end() ? fallback : it->second;
}

std::vector<double> get_doubles(const ConfigMap& map, const std::string& key,
                                const std::vector<double>& fallback) {
    const auto it = map.find(key);
    if (it == map.end()) return fallback;
    std::vector<double> out;
    std::istringstream in(it->second);
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw ConfigError("config key '" + key + "': expected a list of numbers");
    return out;
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    for (size_t i = 0; i < header.size(); ++i) {
        out << header[i] << (i + 1 < header.size() ? "," : "");
    }
    out << "\r\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            out << format_double(row[i]) << (i + 1 < row.size() ? "," : "");
        }
        out << "\r\n";
    }
}

}  // namespace tfg::cli
