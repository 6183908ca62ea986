// Command-line front end: simulate | fit | pcv | report.
// Exit codes: 0 success (diagnostic verdicts are advisory), 2 usage or
// input errors, 3 inference failures.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcv/config.hpp"
#include "pcv/engine.hpp"
#include "pcv/errors.hpp"
#include "pcv/models/registry.hpp"
#include "pcv/report_io.hpp"

namespace {

using nlohmann::json;

struct RunFlags {
  std::string config_path;
  std::string out_dir = ".";
  long seed = -1;
  long chains = -1;
  long iters = -1;
  long warmup = -1;
  long batch_size = -1;
  long blocks = -1;
  long bench_draws = -1;
  std::string score;
  long checkpoint_every = -1;
  long threads = -1;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "run configuration file")->required();
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--seed", f.seed, "override run seed");
  cmd->add_option("--chains", f.chains, "chains per fold (L)");
  cmd->add_option("--iters", f.iters, "sampling iterations per chain (N)");
  cmd->add_option("--warmup", f.warmup, "fold warm-up iterations");
  cmd->add_option("--batch-size", f.batch_size, "batch size b (0 = sqrt(NL))");
  cmd->add_option("--blocks", f.blocks, "shuffle blocks D");
  cmd->add_option("--bench-draws", f.bench_draws, "benchmark replicates R");
  cmd->add_option("--score", f.score, "scoring rule: logs|hs|dss");
  cmd->add_option("--checkpoint-every", f.checkpoint_every,
                  "iterations between snapshots");
  cmd->add_option("--threads", f.threads, "max concurrent chain tasks");
}

pcv::RunConfig make_run_config(const pcv::ConfigMap& cfg, const RunFlags& f) {
  pcv::RunConfig rc;
  rc.seed = cfg.get_u64("run.seed", 1);
  rc.chains = static_cast<int>(cfg.get_long("run.chains", 4));
  rc.iters = cfg.get_long("run.iters", 1000);
  rc.warmup = cfg.get_long("run.warmup", 100);
  rc.batch_size = static_cast<int>(cfg.get_long("run.batch_size", 50));
  rc.blocks = static_cast<int>(cfg.get_long("run.blocks", 5));
  rc.bench_draws = static_cast<int>(cfg.get_long("run.bench_draws", 500));
  rc.bench_quantile = cfg.get_double("run.bench_quantile", 0.99);
  rc.score = pcv::score_from_name(cfg.get_str("run.score", "logs"));
  rc.checkpoint_every = cfg.get_long("run.checkpoint_every", 0);
  rc.thread_budget = static_cast<int>(cfg.get_long("run.threads", 0));
  rc.fd_chains = static_cast<int>(cfg.get_long("full_data.chains", 4));
  rc.fd_warmup = cfg.get_long("full_data.warmup", 1000);
  rc.fd_draws = cfg.get_long("full_data.draws", 2000);
  rc.n_leapfrog = static_cast<int>(cfg.get_long("full_data.leapfrog", 32));
  rc.target_accept = cfg.get_double("full_data.target_accept", 0.8);

  if (f.seed >= 0) rc.seed = static_cast<std::uint64_t>(f.seed);
  if (f.chains >= 0) rc.chains = static_cast<int>(f.chains);
  if (f.iters >= 0) rc.iters = f.iters;
  if (f.warmup >= 0) rc.warmup = f.warmup;
  if (f.batch_size >= 0) rc.batch_size = static_cast<int>(f.batch_size);
  if (f.blocks >= 0) rc.blocks = static_cast<int>(f.blocks);
  if (f.bench_draws >= 0) rc.bench_draws = static_cast<int>(f.bench_draws);
  if (!f.score.empty()) rc.score = pcv::score_from_name(f.score);
  if (f.checkpoint_every >= 0) rc.checkpoint_every = f.checkpoint_every;
  if (f.threads >= 0) rc.thread_budget = static_cast<int>(f.threads);
  return rc;
}

std::string model_stem(size_t index) {
  return index == 0 ? "model_a" : "model_b";
}

int cmd_fit(const RunFlags& flags) {
  const auto cfg = pcv::ConfigMap::parse_file(flags.config_path);
  const auto rc = make_run_config(cfg, flags);
  auto built = pcv::build_models_from_config(cfg);
  std::filesystem::create_directories(flags.out_dir);
  for (size_t m = 0; m < built.models.size(); ++m) {
    const pcv::Model& model = *built.models[m];
    const auto fit = pcv::run_full_data(model, rc, static_cast<int>(m));
    pcv::write_full_data_fit(flags.out_dir, model_stem(m), fit,
                             model.param_names());
    double worst_rhat = 0.0;
    for (double r : fit.rhat_per_param)
      if (std::isfinite(r)) worst_rhat = std::max(worst_rhat, r);
    std::printf("fit %-12s step_size=%.6g divergences=%ld max_param_rhat=%.4f\n",
                model.name().c_str(), fit.kparams.step_size, fit.divergences,
                worst_rhat);
  }
  return 0;
}

int cmd_pcv(const RunFlags& flags) {
  const auto cfg = pcv::ConfigMap::parse_file(flags.config_path);
  const auto rc = make_run_config(cfg, flags);
  auto built = pcv::build_models_from_config(cfg);
  std::vector<pcv::FullDataFit> fits;
  fits.reserve(built.models.size());
  for (size_t m = 0; m < built.models.size(); ++m)
    fits.push_back(pcv::read_full_data_fit(flags.out_dir, model_stem(m)));
  std::vector<pcv::ModelInput> inputs;
  for (size_t m = 0; m < built.models.size(); ++m)
    inputs.push_back(pcv::ModelInput{built.models[m].get(), &fits[m],
                                     static_cast<int>(m)});
  const auto report = pcv::run_pcv(inputs, rc);
  pcv::write_report_json(flags.out_dir + "/report.json", report);
  pcv::write_progressive_csv(flags.out_dir + "/progressive.csv", report);
  pcv::write_benchmark_csv(flags.out_dir + "/benchmark.csv", report);
  std::printf("pcv done: delta_hat=%.6g prob_a_better=%.4f rhat_max=%.4f %s\n",
              report.delta_hat, report.prob_a_better, report.rhat_max,
              report.verdict.pass ? "benchmark=pass" : "benchmark=FAIL");
  return 0;
}

double json_num(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
  }
  return j.get<double>();
}

int cmd_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pcv::invalid_input("cannot open report: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw pcv::invalid_input("malformed report JSON: " + std::string(e.what()));
  }

  std::printf("folds: %ld   chains/fold: %ld   iters/chain: %ld   score: %s\n",
              j.at("folds").get<long>(), j.at("chains").get<long>(),
              j.at("iters").get<long>(), j.at("score").get<std::string>().c_str());
  for (const auto& m : j.at("models")) {
    long divergences = 0;
    for (const auto& fold : m.at("divergences"))
      for (const auto& e : fold) divergences += e.get<long>();
    std::printf("model %-12s total score: %12.4f   divergences: %ld\n",
                m.at("name").get<std::string>().c_str(),
                json_num(m.at("score_total")), divergences);
    const auto& failed = m.at("failed_folds");
    if (!failed.empty()) {
      std::printf("  failed folds:");
      for (const auto& k : failed) std::printf(" %ld", k.get<long>());
      std::printf("\n");
    }
  }
  std::printf("delta_hat:      %12.4f\n", json_num(j.at("delta_hat")));
  std::printf("mcse:           %12.4f\n", json_num(j.at("mcse")));
  std::printf("epistemic_se:   %12.4f\n", json_num(j.at("epistemic_se")));
  std::printf("prob_a_better:  %12.4f\n", json_num(j.at("prob_a_better")));
  std::printf("ess:            %12.1f\n", json_num(j.at("ess")));
  const auto& v = j.at("verdict");
  std::printf("rhat_max:       %12.4f  vs benchmark q%.2f = %.4f  -> %s\n",
              json_num(j.at("rhat_max")), json_num(v.at("quantile")),
              json_num(v.at("quantile_value")),
              v.at("pass").get<bool>() ? "pass" : "FAIL");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel cross-validation engine"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "write a synthetic dataset");
  std::string family, sim_out = ".";
  long sim_seed = 1;
  long j_opt = -1, nj_opt = -1, p_cov = -1, t_opt = -1, p_ar = -1, q_opt = -1,
       houses = -1, counties = -1;
  double rho = -10.0, amp = -1.0, sigma = -1.0, min_beta = -1.0;
  sim->add_option("family", family,
                  "grouped-reg | rat-growth | radon | seasonal-ar")
      ->required();
  sim->add_option("--seed", sim_seed, "simulation seed");
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--J", j_opt, "groups / subjects");
  sim->add_option("--Nj", nj_opt, "observations per group");
  sim->add_option("--P", p_cov, "covariates (grouped-reg)");
  sim->add_option("--T", t_opt, "months (seasonal-ar)");
  sim->add_option("--p", p_ar, "AR order (seasonal-ar)");
  sim->add_option("--q", q_opt, "seasonal dummies (seasonal-ar)");
  sim->add_option("--houses", houses, "houses (radon)");
  sim->add_option("--counties", counties, "counties (radon)");
  sim->add_option("--rho", rho, "AR coefficient (seasonal-ar)");
  sim->add_option("--amp", amp, "seasonal amplitude (seasonal-ar)");
  sim->add_option("--sigma", sigma, "noise sd (seasonal-ar)");
  sim->add_option("--min-omitted-beta", min_beta,
                  "redraw last coefficient until |beta| reaches this");

  RunFlags fit_flags, pcv_flags;
  auto* fit = app.add_subcommand("fit", "full-data adaptation and draw bank");
  add_run_flags(fit, fit_flags);
  auto* pcv_cmd = app.add_subcommand("pcv", "run parallel cross-validation");
  add_run_flags(pcv_cmd, pcv_flags);

  auto* rep = app.add_subcommand("report", "summarize a report JSON");
  std::string report_path;
  rep->add_option("report", report_path, "path to report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      pcv::ConfigMap args;
      auto put = [&](const char* key, long v) {
        if (v >= 0) args.set(key, std::to_string(v));
      };
      put("J", j_opt);
      put("Nj", nj_opt);
      put("P", p_cov);
      put("T", t_opt);
      put("p", p_ar);
      put("q", q_opt);
      put("houses", houses);
      put("counties", counties);
      if (rho > -10.0) args.set("rho", std::to_string(rho));
      if (amp >= 0.0) args.set("amp", std::to_string(amp));
      if (sigma >= 0.0) args.set("sigma", std::to_string(sigma));
      if (min_beta >= 0.0) args.set("min_omitted_beta", std::to_string(min_beta));
      std::filesystem::create_directories(sim_out);
      const std::string csv = pcv::run_simulator(
          family, args, static_cast<std::uint64_t>(sim_seed), sim_out);
      std::printf("wrote %s\n", csv.c_str());
      return 0;
    }
    if (fit->parsed()) return cmd_fit(fit_flags);
    if (pcv_cmd->parsed()) return cmd_pcv(pcv_flags);
    if (rep->parsed()) return cmd_report(report_path);
  } catch (const pcv::invalid_input& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pcv::unsupported_score& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pcv::adaptation_failure& e) {
    std::fprintf(stderr, "inference failure: %s\n", e.what());
    std::fprintf(stderr, "last positions of %zu chains follow\n",
                 e.last_positions.size());
    for (const auto& position : e.last_positions) {
      for (double v : position) std::fprintf(stderr, "%.6g ", v);
      std::fprintf(stderr, "\n");
    }
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "inference failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
