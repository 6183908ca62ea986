#pragma once

// Builds models, fold schemes, and datasets from a run configuration, and
// runs the simulators behind the CLI's `simulate` command.

#include <memory>

#include "pcv/config.hpp"
#include "pcv/model.hpp"

namespace pcv {

struct BuiltModels {
  std::vector<std::unique_ptr<Model>> models;  // one or two candidates
};

// Reads [data], [scheme], and [model] sections; loads the dataset CSV and
// constructs the candidate model(s) over one shared fold assignment.
BuiltModels build_models_from_config(const ConfigMap& cfg);

// Writes <out_dir>/<family>.csv and <out_dir>/<family>_truth.json.
// Returns the CSV path. Supported families: grouped-reg, rat-growth,
// radon, seasonal-ar.
std::string run_simulator(const std::string& family, const ConfigMap& args,
                          std::uint64_t seed, const std::string& out_dir);

}  // namespace pcv
