#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "coact/common.hpp"

namespace coact {

// Flat key-value configuration from an INI/TOML-style file: [section]
// headers, key = value lines, # comments. Keys are stored as
// "section.key"; values keep their raw text and are converted on access.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

}  // namespace coact
