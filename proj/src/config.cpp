#include "coact/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace coact {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path);
}

Config Config::from_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error(origin + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = strip_quotes(trim(line.substr(eq + 1)));
    if (key.empty())
      throw config_error(origin + ":" + std::to_string(line_no) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    cfg.values_[full] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw config_error(origin_ + ": missing required key: " + key);
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string raw = get_string(key);
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0')
    throw config_error(origin_ + ": key " + key + " is not a number: " + raw);
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const {
  const std::string raw = get_string(key);
  char* end = nullptr;
  const long v = std::strtol(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0')
    throw config_error(origin_ + ": key " + key + " is not an integer: " + raw);
  return v;
}

long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string raw = get_string(key);
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0')
    throw config_error(origin_ + ": key " + key + " is not an integer: " + raw);
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string raw = get_string(key);
  if (raw == "true" || raw == "1") return true;
  if (raw == "false" || raw == "0") return false;
  throw config_error(origin_ + ": key " + key + " is not a boolean: " + raw);
}

}  // namespace coact
