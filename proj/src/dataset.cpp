#include "pcv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcv/errors.hpp"

namespace pcv {

int Dataset::n_groups() const {
  if (group_id.empty()) return 0;
  return *std::max_element(group_id.begin(), group_id.end()) + 1;
}

void Dataset::validate() const {
  const long n = n_obs();
  if (n < 1) throw invalid_input("dataset is empty");
  if (static_cast<long>(x.size()) != n * n_cov)
    throw invalid_input("covariate matrix size does not match n_obs");
  if (!group_id.empty()) {
    if (static_cast<long>(group_id.size()) != n)
      throw invalid_input("group column length does not match n_obs");
    const int j = n_groups();
    std::vector<char> seen(j, 0);
    for (int g : group_id) {
      if (g < 0 || g >= j) throw invalid_input("group ids must be 0-based");
      seen[g] = 1;
    }
    for (int g = 0; g < j; ++g)
      if (!seen[g])
        throw invalid_input("group ids must form a contiguous 0..J-1 range");
  }
  if (!time_index.empty() && static_cast<long>(time_index.size()) != n)
    throw invalid_input("time column length does not match n_obs");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, long row, const std::string& col) {
  double v = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw invalid_input("bad numeric value '" + tok + "' at row " +
                        std::to_string(row) + ", column '" + col + "'");
  return v;
}

}  // namespace

Dataset read_csv(const std::string& path, const ColumnRoles& roles) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw invalid_input("CSV has no header: " + path);
  const auto header = split_line(line);

  auto col_of = [&](const std::string& name) -> int {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw invalid_input("CSV column '" + name + "' not found in " + path);
  };

  const int yc = col_of(roles.response);
  std::vector<int> xc;
  for (const auto& c : roles.covariates) xc.push_back(col_of(c));
  const int gc = roles.group.empty() ? -1 : col_of(roles.group);
  const int tc = roles.time.empty() ? -1 : col_of(roles.time);

  Dataset d;
  d.n_cov = static_cast<int>(xc.size());
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto tok = split_line(line);
    if (tok.size() != header.size())
      throw invalid_input("row " + std::to_string(row) + " has " +
                          std::to_string(tok.size()) + " fields, expected " +
                          std::to_string(header.size()));
    d.y.push_back(parse_double(tok[yc], row, roles.response));
    for (size_t j = 0; j < xc.size(); ++j)
      d.x.push_back(parse_double(tok[xc[j]], row, roles.covariates[j]));
    if (gc >= 0) {
      const double g = parse_double(tok[gc], row, roles.group);
      d.group_id.push_back(static_cast<int>(std::lround(g)));
    }
    if (tc >= 0) {
      const double t = parse_double(tok[tc], row, roles.time);
      d.time_index.push_back(std::lround(t));
    }
  }
  d.validate();
  return d;
}

void write_csv(const std::string& path, const Dataset& data,
               const std::vector<std::string>& covariate_names,
               const std::string& response_name, const std::string& group_name,
               const std::string& time_name) {
  if (static_cast<int>(covariate_names.size()) != data.n_cov)
    throw invalid_input("covariate name count does not match n_cov");
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write CSV file: " + path);
  out << response_name;
  for (const auto& c : covariate_names) out << ',' << c;
  if (data.has_groups()) out << ',' << group_name;
  if (data.has_time()) out << ',' << time_name;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (long i = 0; i < data.n_obs(); ++i) {
    put(data.y[i]);
    for (int j = 0; j < data.n_cov; ++j) {
      out << ',';
      put(data.xv(i, j));
    }
    if (data.has_groups()) out << ',' << data.group_id[i];
    if (data.has_time()) out << ',' << data.time_index[i];
    out << '\n';
  }
}

}  // namespace pcv
