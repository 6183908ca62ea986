#include "pcv/report_io.hpp"

#include <cstdio>
#include <fstream>

#include "pcv/errors.hpp"

namespace pcv {

namespace {

using nlohmann::json;

// JSON has no NaN/inf literals; encode them as strings so reports stay
// parseable and byte-stable.
json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json num_vec(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(num(x));
  return arr;
}

void csv_num(std::ofstream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
    return;
  }
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

json report_to_json(const PcvReport& rep) {
  json j;
  j["folds"] = rep.folds;
  j["chains"] = rep.chains;
  j["iters"] = rep.iters;
  j["warmup"] = rep.warmup;
  j["batch_size"] = rep.batch_size;
  j["blocks"] = rep.blocks;
  j["seed"] = rep.seed;
  j["score"] = score_name(rep.score);

  j["models"] = json::array();
  for (const auto& m : rep.models) {
    json jm;
    jm["name"] = m.name;
    jm["model_id"] = m.model_id;
    jm["score_total"] = num(m.score_total);
    jm["numeric_faults"] = m.numeric_faults;
    jm["rhat_excluded"] = m.rhat_excluded;
    jm["failed_folds"] = m.failed_folds;
    jm["divergences"] = m.divergences;
    json folds = json::array();
    for (const auto& f : m.folds) {
      json jf;
      jf["fold"] = f.fold;
      jf["estimate"] = num(f.estimate);
      jf["log_f_hat"] = num(f.log_f_hat);
      jf["mc_contribution"] = num(f.mc_contribution);
      jf["ess"] = num(f.ess);
      jf["rhat"] = num(f.rhat);
      jf["batches"] = f.batches;
      jf["fault"] = f.fault;
      jf["failed"] = f.failed;
      if (f.dss_ridged) jf["dss_ridged"] = true;
      folds.push_back(jf);
    }
    jm["folds"] = folds;
    j["models"].push_back(jm);
  }

  j["delta_hat"] = num(rep.delta_hat);
  j["delta_k"] = num_vec(rep.delta_k);
  j["mcse"] = num(rep.mcse);
  j["sigma2_delta"] = num(rep.sigma2_delta);
  j["epistemic_se"] = num(rep.epistemic_se);
  j["prob_a_better"] = num(rep.prob_a_better);
  j["ess"] = num(rep.ess_overall);
  j["rhat_max"] = num(rep.rhat_max);
  j["dropped_batch_draws"] = rep.dropped_batch_draws;

  j["benchmark"] = {{"replicates", rep.benchmark.replicates},
                    {"values", num_vec(rep.benchmark.values)}};
  j["verdict"] = {{"pass", rep.verdict.pass},
                  {"quantile", num(rep.verdict.quantile)},
                  {"quantile_value", num(rep.verdict.quantile_value)},
                  {"observed", num(rep.verdict.observed)}};

  json snaps = json::array();
  for (const auto& s : rep.snapshots)
    snaps.push_back({{"iteration", s.iteration},
                     {"delta_hat", num(s.delta_hat)},
                     {"mcse", num(s.mcse)},
                     {"epistemic_se", num(s.epistemic_se)},
                     {"prob_a_better", num(s.prob_a_better)},
                     {"ess", num(s.ess)},
                     {"rhat_max", num(s.rhat_max)}});
  j["snapshots"] = snaps;
  return j;
}

void write_report_json(const std::string& path, const PcvReport& report) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write report: " + path);
  out << report_to_json(report).dump(2) << '\n';
}

void write_progressive_csv(const std::string& path, const PcvReport& report) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write snapshots: " + path);
  out << "iteration,delta_hat,mcse,epistemic_se,prob_a_better,ess,rhat_max\n";
  for (const auto& s : report.snapshots) {
    out << s.iteration << ',';
    csv_num(out, s.delta_hat);
    out << ',';
    csv_num(out, s.mcse);
    out << ',';
    csv_num(out, s.epistemic_se);
    out << ',';
    csv_num(out, s.prob_a_better);
    out << ',';
    csv_num(out, s.ess);
    out << ',';
    csv_num(out, s.rhat_max);
    out << '\n';
  }
}

void write_benchmark_csv(const std::string& path, const PcvReport& report) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write benchmark: " + path);
  out << "# observed_rhat_max=";
  csv_num(out, report.rhat_max);
  out << " D=" << report.blocks << " R=" << report.benchmark.replicates << '\n';
  out << "replicate,rhat_max_replicate\n";
  for (size_t r = 0; r < report.benchmark.values.size(); ++r) {
    out << r << ',';
    csv_num(out, report.benchmark.values[r]);
    out << '\n';
  }
}

void write_full_data_fit(const std::string& dir, const std::string& stem,
                         const FullDataFit& fit,
                         const std::vector<std::string>& param_names) {
  const std::string base = dir + "/" + stem;
  const long rows = static_cast<long>(fit.draws.size());
  const long cols = rows > 0 ? static_cast<long>(fit.draws[0].size()) : 0;
  {
    std::ofstream bank(base + "_bank.f64", std::ios::binary);
    if (!bank) throw invalid_input("cannot write draw bank: " + base);
    for (const auto& row : fit.draws)
      bank.write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  {
    json sidecar;
    sidecar["rows"] = rows;
    sidecar["cols"] = cols;
    sidecar["params"] = param_names;
    std::ofstream out(base + "_bank.json");
    out << sidecar.dump(2) << '\n';
  }
  {
    json kernel;
    kernel["step_size"] = fit.kparams.step_size;
    kernel["n_leapfrog"] = fit.kparams.n_leapfrog;
    kernel["inv_mass_diag"] = fit.kparams.inv_mass_diag;
    kernel["divergences"] = fit.divergences;
    kernel["mean_accept"] = fit.mean_accept;
    kernel["rhat_per_param"] = num_vec(fit.rhat_per_param);
    kernel["ess_per_param"] = num_vec(fit.ess_per_param);
    std::ofstream out(base + "_kernel.json");
    out << kernel.dump(2) << '\n';
  }
}

FullDataFit read_full_data_fit(const std::string& dir,
                               const std::string& stem) {
  const std::string base = dir + "/" + stem;
  std::ifstream side(base + "_bank.json");
  if (!side)
    throw invalid_input("missing full-data artifacts: " + base + "_bank.json");
  json sidecar = json::parse(side);
  const long rows = sidecar.at("rows").get<long>();
  const long cols = sidecar.at("cols").get<long>();

  FullDataFit fit;
  std::ifstream bank(base + "_bank.f64", std::ios::binary);
  if (!bank)
    throw invalid_input("missing full-data artifacts: " + base + "_bank.f64");
  fit.draws.assign(rows, std::vector<double>(cols));
  for (auto& row : fit.draws) {
    bank.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(cols * sizeof(double)));
    if (!bank) throw invalid_input("draw bank truncated: " + base + "_bank.f64");
  }

  std::ifstream kin(base + "_kernel.json");
  if (!kin)
    throw invalid_input("missing full-data artifacts: " + base + "_kernel.json");
  json kernel = json::parse(kin);
  fit.kparams.step_size = kernel.at("step_size").get<double>();
  fit.kparams.n_leapfrog = kernel.at("n_leapfrog").get<int>();
  fit.kparams.inv_mass_diag =
      kernel.at("inv_mass_diag").get<std::vector<double>>();
  fit.divergences = kernel.value("divergences", 0L);
  fit.mean_accept = kernel.value("mean_accept", 0.0);
  return fit;
}

}  // namespace pcv
