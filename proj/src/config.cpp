#include "pcv/config.hpp"

#include <fstream>
#include <sstream>

#include "pcv/errors.hpp"

namespace pcv {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

ConfigMap ConfigMap::parse_string(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw invalid_input("config line " + std::to_string(lineno) +
                            ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_input("config line " + std::to_string(lineno) +
                          ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

std::string ConfigMap::get_str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw invalid_input("missing required config key '" + key + "'");
  return it->second;
}

std::string ConfigMap::get_str(const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stol(it->second);
}

long ConfigMap::require_long(const std::string& key) const {
  return std::stol(get_str(key));
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stod(it->second);
}

std::uint64_t ConfigMap::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoull(it->second);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw invalid_input("config key '" + key + "' is not a boolean: " + v);
}

std::vector<std::string> ConfigMap::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : get_str(key)) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::vector<int> ConfigMap::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& tok : get_list(key)) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace pcv
