#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pcv {

// Column-oriented dataset: one response, zero or more covariates, and
// optional group / time labels. Groups must form a contiguous 0..J-1 range.
struct Dataset {
  std::vector<double> y;
  std::vector<double> x;  // row-major, n_obs x n_cov
  int n_cov = 0;
  std::vector<int> group_id;     // empty when absent
  std::vector<long> time_index;  // empty when absent

  long n_obs() const { return static_cast<long>(y.size()); }
  bool has_groups() const { return !group_id.empty(); }
  bool has_time() const { return !time_index.empty(); }
  int n_groups() const;
  double xv(long i, int j) const { return x[i * n_cov + j]; }

  void validate() const;  // throws invalid_input on broken invariants
};

// Which CSV columns play which role. Covariates are taken in the order given.
struct ColumnRoles {
  std::string response;
  std::vector<std::string> covariates;
  std::string group;  // empty = none
  std::string time;   // empty = none
};

Dataset read_csv(const std::string& path, const ColumnRoles& roles);

// Writes a header row of names, then one row per observation.
void write_csv(const std::string& path, const Dataset& data,
               const std::vector<std::string>& covariate_names,
               const std::string& response_name = "y",
               const std::string& group_name = "group",
               const std::string& time_name = "t");

}  // namespace pcv
