#include "patchreg/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace patchreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& is, const std::string& origin) {
  ConfigMap cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    // Strip comments outside quotes.
    bool quoted = false;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        cut = i;
        break;
      }
    }
    line = trim(line.substr(0, cut));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!std::all_of(key.begin(), key.end(), [](unsigned char c) {
          return std::isalnum(c) || c == '_' || c == '-' || c == '.';
        }))
      throw ConfigError(where + ": invalid key '" + key + "'");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    else if (value.find('"') != std::string::npos)
      throw ConfigError(where + ": unbalanced quotes");
    if (cfg.contains(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    cfg.set(key, value);
  }
  return cfg;
}

ConfigMap ConfigMap::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  return parse(is, path);
}

std::optional<std::string> ConfigMap::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ConfigMap::get_double(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(*s, &pos);
    if (pos == s->size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': expected a number, got '" + *s + "'");
}

std::optional<long long> ConfigMap::get_int(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(*s, &pos);
    if (pos == s->size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': expected an integer, got '" + *s + "'");
}

std::optional<bool> ConfigMap::get_bool(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") return true;
  if (*s == "false" || *s == "0" || *s == "no" || *s == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + *s + "'");
}

}  // namespace patchreg
