#include "pacbound/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pacb {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& raw) {
  try {
    std::size_t pos = 0;
    double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" +
                                raw + "' as a number");
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line +
                                  "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string Config::get_string(const std::string& key,
                               const std::string& def) const {
  auto it = values_.find(key);
  std::string v = it == values_.end() ? def : it->second;
  resolved_[key] = v;
  return v;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = values_.find(key);
  double v = it == values_.end() ? def : parse_double(key, it->second);
  resolved_[key] = format_double(v);
  return v;
}

long long Config::get_int(const std::string& key, long long def) const {
  auto it = values_.find(key);
  long long v = def;
  if (it != values_.end()) {
    try {
      std::size_t pos = 0;
      v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key +
                                  "': cannot parse '" + it->second +
                                  "' as an integer");
    }
  }
  resolved_[key] = std::to_string(v);
  return v;
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto it = values_.find(key);
  bool v = def;
  if (it != values_.end()) {
    const std::string& raw = it->second;
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") {
      v = true;
    } else if (raw == "false" || raw == "0" || raw == "no" || raw == "off") {
      v = false;
    } else {
      throw std::invalid_argument("config key '" + key +
                                  "': cannot parse '" + raw + "' as a bool");
    }
  }
  resolved_[key] = v ? "true" : "false";
  return v;
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& def) const {
  auto it = values_.find(key);
  std::vector<double> v;
  if (it == values_.end()) {
    v = def;
  } else {
    for (const std::string& part : split(it->second, ',')) {
      if (part.empty()) {
        throw std::invalid_argument("config key '" + key +
                                    "': empty entry in list");
      }
      v.push_back(parse_double(key, part));
    }
  }
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += format_double(v[i]);
  }
  resolved_[key] = s;
  return v;
}

std::vector<std::vector<double>> Config::get_matrix(
    const std::string& key,
    const std::vector<std::vector<double>>& def) const {
  auto it = values_.find(key);
  std::vector<std::vector<double>> v;
  if (it == values_.end()) {
    v = def;
  } else {
    for (const std::string& row : split(it->second, ';')) {
      if (row.empty()) {
        throw std::invalid_argument("config key '" + key +
                                    "': empty row in matrix");
      }
      std::vector<double> r;
      for (const std::string& part : split(row, ',')) {
        if (part.empty()) {
          throw std::invalid_argument("config key '" + key +
                                      "': empty entry in matrix");
        }
        r.push_back(parse_double(key, part));
      }
      v.push_back(r);
    }
  }
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ";";
    for (std::size_t j = 0; j < v[i].size(); ++j) {
      if (j) s += ",";
      s += format_double(v[i][j]);
    }
  }
  resolved_[key] = s;
  return v;
}

std::string Config::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::invalid_argument("config key '" + key + "' is required");
  }
  resolved_[key] = it->second;
  return it->second;
}

nlohmann::json Config::resolved_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : resolved_) j[k] = v;
  return j;
}

}  // namespace pacb
