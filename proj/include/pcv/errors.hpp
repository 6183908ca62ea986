#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pcv {

// Error taxonomy used across the engine:
//   invalid_input        caller violated a precondition (bad K, empty data, ...)
//   numeric_fault        non-finite value reached an accumulator or predictive
//   adaptation_failure   full-data warmup never stabilized; carries last positions
//   undefined_diagnostic statistic has no defined value (e.g. Rhat of constant chains)
//   unsupported_score    model lacks the hooks a scoring rule requires

struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct numeric_fault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct adaptation_failure : std::runtime_error {
  adaptation_failure(const std::string& msg,
                     std::vector<std::vector<double>> last_positions_)
      : std::runtime_error(msg), last_positions(std::move(last_positions_)) {}
  std::vector<std::vector<double>> last_positions;
};

struct undefined_diagnostic : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct unsupported_score : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pcv
