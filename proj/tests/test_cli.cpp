// End-to-end checks of the command-line tool: the three-command pipeline,
// byte reproducibility, exit codes, and file round trips.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pcv/config.hpp"
#include "pcv/dataset.hpp"
#include "pcv/errors.hpp"
#include "pcv/models/registry.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PCV_CLI_PATH) + " " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_config(const std::string& path, const std::string& data_csv) {
  std::ofstream out(path);
  out << "[data]\n"
      << "path = " << data_csv << "\n"
      << "response = y\n"
      << "covariates = x1,x2,x3,x4\n"
      << "group = group\n"
      << "[scheme]\n"
      << "kind = logo\n"
      << "[model]\n"
      << "family = grouped-reg\n"
      << "mask_a = 1,1,1,1\n"
      << "mask_b = 1,1,1,0\n"
      << "[run]\n"
      << "seed = 7\n"
      << "chains = 2\n"
      << "iters = 120\n"
      << "warmup = 30\n"
      << "batch_size = 20\n"
      << "blocks = 4\n"
      << "bench_draws = 40\n"
      << "checkpoint_every = 60\n"
      << "[full_data]\n"
      << "chains = 2\n"
      << "warmup = 300\n"
      << "draws = 300\n"
      << "leapfrog = 12\n";
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("cli_tmp") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("simulate writes deterministic files") {
  TempDir dir("sim");
  const std::string args =
      "simulate grouped-reg --J 6 --Nj 3 --seed 1 --out " + dir.str();
  REQUIRE(run_cli(args) == 0);
  const std::string csv = dir.str() + "/grouped-reg.csv";
  const std::string truth = dir.str() + "/grouped-reg_truth.json";
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(truth));
  const std::string first = slurp(csv) + slurp(truth);
  REQUIRE(run_cli(args) == 0);
  CHECK(first == slurp(csv) + slurp(truth));

  // The CSV parses back with the documented roles.
  pcv::ColumnRoles roles{"y", {"x1", "x2", "x3", "x4"}, "group", ""};
  const auto data = pcv::read_csv(csv, roles);
  CHECK(data.n_obs() == 18);
  CHECK(data.n_groups() == 6);

  // 250-row variant used throughout the examples.
  TempDir big("sim_big");
  REQUIRE(run_cli("simulate grouped-reg --J 50 --Nj 5 --seed 1 --out " +
                  big.str()) == 0);
  CHECK(pcv::read_csv(big.str() + "/grouped-reg.csv", roles).n_obs() == 250);
}

TEST_CASE("simulate usage errors exit with 2") {
  CHECK(run_cli("simulate unknown-family --out cli_tmp") == 2);
  CHECK(run_cli("simulate") == 2);
  CHECK(run_cli("nonsense-command") == 2);
}

TEST_CASE("fit then pcv then report round trip") {
  TempDir dir("pipe");
  REQUIRE(run_cli("simulate grouped-reg --J 6 --Nj 3 --seed 3 --out " +
                  dir.str()) == 0);
  const std::string cfg_path = dir.str() + "/run.cfg";
  write_config(cfg_path, dir.str() + "/grouped-reg.csv");

  REQUIRE(run_cli("fit --config " + cfg_path + " --out " + dir.str()) == 0);
  for (const char* stem : {"model_a", "model_b"})
    for (const char* suffix : {"_bank.f64", "_bank.json", "_kernel.json"})
      CHECK(fs::exists(dir.str() + "/" + stem + suffix));

  // Kernel sanity: adaptation produced a positive step size.
  const auto kernel =
      nlohmann::json::parse(slurp(dir.str() + "/model_a_kernel.json"));
  CHECK(kernel.at("step_size").get<double>() > 0.0);

  REQUIRE(run_cli("pcv --config " + cfg_path + " --out " + dir.str()) == 0);
  REQUIRE(fs::exists(dir.str() + "/report.json"));
  REQUIRE(fs::exists(dir.str() + "/progressive.csv"));
  REQUIRE(fs::exists(dir.str() + "/benchmark.csv"));

  const auto report = nlohmann::json::parse(slurp(dir.str() + "/report.json"));
  CHECK(report.at("folds").get<int>() == 6);
  CHECK(report.at("snapshots").size() == 2);

  // progressive.csv column header, exactly as documented.
  std::ifstream prog(dir.str() + "/progressive.csv");
  std::string header;
  std::getline(prog, header);
  CHECK(header ==
        "iteration,delta_hat,mcse,epistemic_se,prob_a_better,ess,rhat_max");

  // benchmark.csv leads with the observed line then the column header.
  std::ifstream bench(dir.str() + "/benchmark.csv");
  std::string line1, line2;
  std::getline(bench, line1);
  std::getline(bench, line2);
  CHECK(line1.find("# observed_rhat_max=") == 0);
  CHECK(line1.find("D=4") != std::string::npos);
  CHECK(line1.find("R=40") != std::string::npos);
  CHECK(line2 == "replicate,rhat_max_replicate");

  REQUIRE(run_cli("report " + dir.str() + "/report.json") == 0);
  const std::string summary = slurp("cli_stdout.txt");
  CHECK(summary.find("delta_hat") != std::string::npos);
  CHECK(summary.find("prob_a_better") != std::string::npos);
  CHECK(summary.find("rhat_max") != std::string::npos);
}

TEST_CASE("pipeline is byte-reproducible across runs and thread budgets") {
  TempDir a("rep_a"), b("rep_b");
  for (const auto& dir : {a.str(), b.str()}) {
    REQUIRE(run_cli("simulate grouped-reg --J 6 --Nj 3 --seed 9 --out " + dir) ==
            0);
    const std::string cfg_path = dir + "/run.cfg";
    write_config(cfg_path, dir + "/grouped-reg.csv");
    REQUIRE(run_cli("fit --config " + cfg_path + " --out " + dir) == 0);
  }
  REQUIRE(run_cli("pcv --config " + a.str() + "/run.cfg --threads 1 --out " +
                  a.str()) == 0);
  REQUIRE(run_cli("pcv --config " + b.str() + "/run.cfg --threads 8 --out " +
                  b.str()) == 0);
  for (const char* name :
       {"/grouped-reg.csv", "/model_a_bank.f64", "/model_b_bank.f64",
        "/report.json", "/progressive.csv", "/benchmark.csv"})
    CHECK(slurp(a.str() + name) == slurp(b.str() + name));
}

TEST_CASE("pcv without artifacts and corrupt inputs exit with 2") {
  TempDir dir("err");
  REQUIRE(run_cli("simulate grouped-reg --J 6 --Nj 3 --seed 3 --out " +
                  dir.str()) == 0);
  const std::string cfg_path = dir.str() + "/run.cfg";
  write_config(cfg_path, dir.str() + "/grouped-reg.csv");
  CHECK(run_cli("pcv --config " + cfg_path + " --out " + dir.str()) == 2);

  // Corrupt a data cell: fit must fail with a row/column message.
  std::string csv = slurp(dir.str() + "/grouped-reg.csv");
  const auto pos = csv.find('\n') + 1;
  csv.replace(pos, csv.find(',', pos) - pos, "not-a-number");
  std::ofstream(dir.str() + "/grouped-reg.csv") << csv;
  CHECK(run_cli("fit --config " + cfg_path + " --out " + dir.str()) == 2);
  const std::string err = slurp("cli_stderr.txt");
  CHECK(err.find("row 2") != std::string::npos);

  CHECK(run_cli("report does_not_exist.json") == 2);
  std::ofstream(dir.str() + "/bad.json") << "{ not json";
  CHECK(run_cli("report " + dir.str() + "/bad.json") == 2);
}

TEST_CASE("dss score runs through the cli") {
  TempDir dir("dss");
  REQUIRE(run_cli("simulate grouped-reg --J 5 --Nj 3 --seed 4 --out " +
                  dir.str()) == 0);
  const std::string cfg_path = dir.str() + "/run.cfg";
  write_config(cfg_path, dir.str() + "/grouped-reg.csv");
  REQUIRE(run_cli("fit --config " + cfg_path + " --out " + dir.str()) == 0);
  CHECK(run_cli("pcv --config " + cfg_path + " --score dss --out " +
                dir.str()) == 0);
  CHECK(run_cli("pcv --config " + cfg_path + " --score nonsense --out " +
                dir.str()) == 2);
}

TEST_CASE("registry builds every model family from config") {
  using pcv::ConfigMap;
  TempDir dir("registry");
  // rat-growth
  REQUIRE(run_cli("simulate rat-growth --J 6 --seed 2 --out " + dir.str()) == 0);
  {
    const auto cfg = ConfigMap::parse_string(
        "[data]\npath = " + dir.str() + "/rat-growth.csv\n" +
        "response = y\ncovariates = t\ngroup = group\n"
        "[scheme]\nkind = logo\n"
        "[model]\nfamily = rat-growth\nslope_a = per-subject\nslope_b = shared\n");
    const auto built = pcv::build_models_from_config(cfg);
    REQUIRE(built.models.size() == 2);
    CHECK(built.models[0]->fold_count() == 6);
    CHECK(built.models[0]->dim() == 2 * 6 + 5);
    CHECK(built.models[1]->dim() == 6 + 4);
  }
  // radon
  REQUIRE(run_cli("simulate radon --houses 60 --counties 6 --seed 2 --out " +
                  dir.str()) == 0);
  {
    const auto cfg = ConfigMap::parse_string(
        "[data]\npath = " + dir.str() + "/radon.csv\n" +
        "response = y\ncovariates = floor\ngroup = group\n"
        "[scheme]\nkind = logo\n"
        "[model]\nfamily = radon\nfloor_a = true\nfloor_b = false\n");
    const auto built = pcv::build_models_from_config(cfg);
    REQUIRE(built.models.size() == 2);
    CHECK(built.models[0]->fold_count() == 6);
    CHECK(built.models[0]->dim() == built.models[1]->dim());
  }
  // seasonal-ar with time blocks
  REQUIRE(run_cli("simulate seasonal-ar --T 120 --p 1 --q 11 --seed 2 --out " +
                  dir.str()) == 0);
  {
    std::string covs = "lag1";
    for (int j = 1; j <= 11; ++j) covs += ",d" + std::to_string(j);
    const auto cfg = ConfigMap::parse_string(
        "[data]\npath = " + dir.str() + "/seasonal-ar.csv\n" +
        "response = y\ncovariates = " + covs + "\ntime = t\n"
        "[scheme]\nkind = time-blocks\nk = 8\n"
        "[model]\nfamily = seasonal-ar\np = 1\nq_a = 11\nq_b = 0\n"
        "rho_transform = symmetric\n");
    const auto built = pcv::build_models_from_config(cfg);
    REQUIRE(built.models.size() == 2);
    CHECK(built.models[0]->fold_count() == 8);
    CHECK(built.models[0]->dim() == 1 + 12 + 1);
    CHECK(built.models[1]->dim() == 1 + 1 + 1);
  }
  // unknown family
  const auto bad = ConfigMap::parse_string(
      "[data]\npath = " + dir.str() + "/radon.csv\n" +
      "response = y\ncovariates = floor\ngroup = group\n"
      "[model]\nfamily = mystery\n");
  CHECK_THROWS_AS(pcv::build_models_from_config(bad), pcv::invalid_input);
}
