#pragma once

#include <map>
#include <string>
#include <vector>

namespace tfg::cli {

/// Flat `key = value` configuration text. `#` starts a comment. Unknown keys
/// are kept so a run manifest (which embeds extra metadata) stays loadable.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);
std::string dump_config(const ConfigMap& map);

double get_double(const ConfigMap& map, const std::string& key, double fallback);
int get_int(const ConfigMap& map, const std::string& key, int fallback);
long long get_long(const ConfigMap& map, const std::string& key, long long fallback);
bool get_bool(const ConfigMap& map, const std::string& key, bool fallback);
std::string get_string(const ConfigMap& map, const std::string& key, std::string fallback);
std::vector<double> get_doubles(const ConfigMap& map, const std::string& key,
                                const std::vector<double>& fallback);

/// Shortest-exact decimal form with up to 17 significant digits, '.' separator,
/// locale independent.
std::string format_double(double value);

/// One CSV line per row, RFC-4180 (CRLF line ends).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace tfg::cli
