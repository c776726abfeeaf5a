#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace pacb {

// Experiment configuration: a text file of "dotted.key = value" lines, '#'
// comments allowed. Values are scalars, comma-separated lists, or
// semicolon-separated rows of comma-separated lists. Every value a getter
// resolves (defaults included) is recorded so outputs can embed the complete
// effective configuration.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& def) const;
  // rows separated by ';', entries by ','
  std::vector<std::vector<double>> get_matrix(
      const std::string& key, const std::vector<std::vector<double>>& def) const;

  std::string require_string(const std::string& key) const;

  // every key resolved so far, value as written (or default, stringified)
  const std::map<std::string, std::string>& resolved() const {
    return resolved_;
  }
  nlohmann::json resolved_json() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace pacb
