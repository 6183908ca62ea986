#pragma once

// File formats: report JSON, progressive-snapshot CSV, benchmark histogram
// CSV, and the binary draw bank (row-major little-endian doubles with a JSON
// sidecar carrying the shape and parameter names).

#include <string>

#include "json.hpp"
#include "pcv/engine.hpp"

namespace pcv {

nlohmann::json report_to_json(const PcvReport& report);
void write_report_json(const std::string& path, const PcvReport& report);

// Columns: iteration, delta_hat, mcse, epistemic_se, prob_a_better, ess,
// rhat_max. One row per checkpoint.
void write_progressive_csv(const std::string& path, const PcvReport& report);

// First line: "# observed_rhat_max=... D=... R=...", then
// "replicate,rhat_max_replicate" rows.
void write_benchmark_csv(const std::string& path, const PcvReport& report);

// Artifacts of one full-data fit under dir with the given stem:
//   <stem>_bank.f64     row-major draws x dim, little-endian doubles
//   <stem>_bank.json    {"rows": R, "cols": D, "params": [...]}
//   <stem>_kernel.json  kernel parameters and full-data diagnostics
void write_full_data_fit(const std::string& dir, const std::string& stem,
                         const FullDataFit& fit,
                         const std::vector<std::string>& param_names);
FullDataFit read_full_data_fit(const std::string& dir, const std::string& stem);

}  // namespace pcv
