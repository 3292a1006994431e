#ifndef DCSI_CONFIG_HPP
#define DCSI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dcsi {

/// Dotted key -> raw value, e.g. "scenario.num_rx" -> "5".
using ConfigMap = std::map<std::string, std::string>;

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
/// An `[group]` header prefixes subsequent keys with "group.".
ConfigMap parse_config(std::string_view text);
ConfigMap load_config(const std::filesystem::path& path);

/// Entries under "prefix." with the prefix stripped.
std::map<std::string, std::string> config_group(const ConfigMap& config, std::string_view prefix);

// Value parsers. `field` is used in the ConfigError message.
double parse_double(const std::string& field, std::string_view value);
std::int64_t parse_int(const std::string& field, std::string_view value);
std::uint64_t parse_u64(const std::string& field, std::string_view value);
bool parse_bool(const std::string& field, std::string_view value);
std::vector<double> parse_double_list(const std::string& field, std::string_view value);
std::vector<std::string> parse_string_list(std::string_view value);

}  // namespace dcsi

#endif  // DCSI_CONFIG_HPP
