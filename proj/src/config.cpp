#include "dcsi/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dcsi/errors.hpp"

namespace dcsi {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::string group;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no), "unterminated group header");
      group = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
    if (!group.empty()) key = group + "." + key;
    out[key] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::map<std::string, std::string> config_group(const ConfigMap& config, std::string_view prefix) {
  std::map<std::string, std::string> out;
  const std::string p = std::string(prefix) + ".";
  for (const auto& [k, v] : config)
    if (k.rfind(p, 0) == 0) out[k.substr(p.size())] = v;
  return out;
}

double parse_double(const std::string& field, std::string_view value) {
  value = trim(value);
  const std::string v = lower(value);
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  double out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || std::isnan(out))
    throw ConfigError(field, "not a number: '" + std::string(value) + "'");
  return out;
}

std::int64_t parse_int(const std::string& field, std::string_view value) {
  value = trim(value);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(field, "not an integer: '" + std::string(value) + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& field, std::string_view value) {
  value = trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(field, "not an unsigned 64-bit integer: '" + std::string(value) + "'");
  return out;
}

bool parse_bool(const std::string& field, std::string_view value) {
  const std::string v = lower(trim(value));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(field, "not a boolean: '" + v + "'");
}

std::vector<std::string> parse_string_list(std::string_view value) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    value = value.substr(comma + 1);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& field, std::string_view value) {
  std::vector<double> out;
  for (const auto& item : parse_string_list(value)) out.push_back(parse_double(field, item));
  if (out.empty()) throw ConfigError(field, "empty list");
  return out;
}

}  // namespace dcsi
