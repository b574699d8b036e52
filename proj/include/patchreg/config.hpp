#pragma once

// Flat key = value configuration files. '#' starts a comment, values may
// be double-quoted, keys are unique.

#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace patchreg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigMap {
 public:
  static ConfigMap parse(std::istream& is, const std::string& origin = "<config>");
  static ConfigMap load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace patchreg
