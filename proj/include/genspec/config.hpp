#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace genspec {

// `key = value` text: one pair per line, `#` starts a comment, blank lines
// ignored, later keys override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  // Comma-separated reals.
  std::optional<std::vector<double>> get_doubles(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

double parse_double(const std::string& text);
std::int64_t parse_int(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);
std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

// Shortest representation that parses back to the same double.
std::string format_double(double value);
// Fixed notation with `digits` decimals; locale independent.
std::string format_fixed(double value, int digits);

}  // namespace genspec
