#pragma once

// Flat key=value run configuration with [section] headers and '#' comments.
// Keys are addressed as "section.key"; keys before any section have no
// prefix. Values stay strings until a typed getter is called.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pcv {

class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  long get_long(const std::string& key, long fallback) const;
  long require_long(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace pcv
