// Acceptance suite: ten end-to-end criteria, one pass/fail line each.
// Exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcv/diagnostics.hpp"
#include "pcv/engine.hpp"
#include "pcv/folds.hpp"
#include "pcv/math.hpp"
#include "pcv/models/grouped_regression.hpp"
#include "pcv/report_io.hpp"
#include "pcv/scoring.hpp"
#include "test_support.hpp"

using namespace pcv;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, bool pass, const std::string& name,
            const std::string& detail) {
  std::printf("[%s] C%-2d %s (%s)\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
void criterion_online_two_pass() {
  CounterRng rng(1001, 1);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int l = 2 + static_cast<int>(rng.below(3));
    const long n = 500 + static_cast<long>(rng.below(9500));
    const int b = 10 + static_cast<int>(rng.below(90));
    const double mu = -5.0 + 7.0 * rng.uniform();
    const double sd = 0.1 + 1.9 * rng.uniform();
    oracle::Chains chains(l);
    for (auto& ch : chains) {
      const double shift = 0.05 * rng.normal();
      for (long i = 0; i < n; ++i)
        ch.push_back(mu + shift + sd * rng.normal());
    }
    const auto ref = oracle::two_pass(chains, b);
    const auto acc = oracle::feed(chains, b, 5, mu);
    const auto fs = logs_fold_score(acc, n);
    const auto rh = rhat_from_blocks(acc, n);

    const double ln = static_cast<double>(l) * n;
    worst = std::max(worst, oracle::rel_err(fs.estimate, ref.score));
    const double mcse_online = std::sqrt(fs.mc_contribution / ln);
    const double mcse_ref =
        std::sqrt(ref.sigma2_f / (ref.f_hat * ref.f_hat) / ln);
    worst = std::max(worst, oracle::rel_err(mcse_online, mcse_ref));
    worst = std::max(worst, oracle::rel_err(fs.ess, ref.ess));
    worst = std::max(worst, oracle::rel_err(rh->w, ref.w));
    worst = std::max(worst, oracle::rel_err(rh->b, ref.b));
    worst = std::max(worst, oracle::rel_err(rh->rhat, ref.rhat));
  }
  report(1, worst < 1e-8, "online/two-pass equivalence on 100 random streams",
         fmt("max rel err %.3g", worst));
}

// ---------------------------------------------------------------- criterion 2
void criterion_rhat_closed_cases() {
  auto acc = oracle::feed({{1.0, 2.0}, {3.0, 4.0}}, 1, 1, 0.0);
  const auto stats = rhat_from_blocks(acc, 2);
  const double err1 = std::fabs(stats->rhat - std::sqrt(4.5));
  const double err_w = std::fabs(stats->w - 0.5);
  const double err_b = std::fabs(stats->b - 4.0);

  std::vector<double> ch{0.3, -1.2, 0.8, 2.0, -0.5};
  auto same = oracle::feed({ch, ch, ch, ch}, 1, 1, 0.0);
  const auto stats2 = rhat_from_blocks(same, 5);
  const double err2 = std::fabs(stats2->rhat - std::sqrt(4.0 / 5.0));

  const bool pass = err1 < 1e-12 && err_w < 1e-12 && err_b < 1e-12 &&
                    err2 < 1e-12;
  report(2, pass, "hand-derived Rhat closed cases",
         fmt("sqrt(4.5) err %.2g, identical-chain err %.2g", err1, err2));
}

// Minimal 1-D standard normal model for the sampler criteria.
class StdNormal : public Model {
 public:
  std::string name() const override { return "std-normal"; }
  int dim() const override { return 1; }
  int fold_count() const override { return 1; }
  long test_size(int fold) const override { return fold == 0 ? 1 : 0; }
  double log_joint(std::span<const double> t, int) const override {
    return normal_logpdf(t[0], 0.0, 1.0);
  }
  void grad_log_joint(std::span<const double> t, int,
                      std::span<double> g) const override {
    g[0] = -t[0];
  }
  double log_pred(std::span<const double> t, int fold) const override {
    return fold == 0 ? normal_logpdf(1.0, t[0], 1.0) : 0.0;
  }
  double log_lik_test(std::span<const double> t, int fold) const override {
    return log_pred(t, fold);
  }
  std::vector<double> initial_draw(CounterRng& rng) const override {
    return {rng.normal()};
  }
  std::vector<double> test_values(int) const override { return {1.0}; }
};

// ---------------------------------------------------------------- criterion 3
void criterion_hmc_normal() {
  StdNormal target;
  const KernelParams kp{0.157, 10, {1.0}};
  const int l = 4;
  const long n = 10000;
  int ks_pass = 0;
  bool moments_ok = true;
  double worst_var = 1.0, worst_z = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    HmcWorkspace ws;
    std::vector<double> pooled;
    oracle::Chains chains(l);
    for (int c = 0; c < l; ++c) {
      ChainState chain{{0.0},
                       CounterRng(3000 + seed,
                                  stream_key(StreamKind::ChainSampling, 0, 0,
                                             static_cast<std::uint64_t>(c))),
                       0};
      for (long i = 0; i < n; ++i) {
        hmc_step(chain, target, 0, kp, ws);
        chains[c].push_back(chain.position[0]);
        pooled.push_back(chain.position[0]);
      }
    }
    double mean = 0.0;
    for (double v : pooled) mean += v;
    mean /= pooled.size();
    double var = 0.0;
    for (double v : pooled) var += (v - mean) * (v - mean);
    var /= pooled.size() - 1.0;

    std::vector<std::vector<double>> bm(l);
    const int b = 100;
    for (int c = 0; c < l; ++c)
      for (long h = 0; h + b <= n; h += b) {
        double m = 0.0;
        for (long i = h; i < h + b; ++i) m += chains[c][i];
        bm[c].push_back(m / b);
      }
    const double mcse = std::sqrt(batch_means_variance(bm, b) / (l * n));
    if (std::fabs(mean) > 3.0 * mcse) moments_ok = false;
    worst_z = std::max(worst_z, std::fabs(mean) / mcse);
    if (std::fabs(var - 1.0) > 0.10) moments_ok = false;
    worst_var = std::max(worst_var, std::fabs(var - 1.0) + 1.0);

    std::sort(pooled.begin(), pooled.end());
    double d_stat = 0.0;
    const double sz = static_cast<double>(pooled.size());
    for (size_t i = 0; i < pooled.size(); ++i) {
      const double cdf = normal_cdf(pooled[i]);
      d_stat = std::max(d_stat, std::fabs(cdf - (i + 1) / sz));
      d_stat = std::max(d_stat, std::fabs(cdf - i / sz));
    }
    if (d_stat < 1.6276 / std::sqrt(sz)) ++ks_pass;
  }
  const bool pass = moments_ok && ks_pass >= 9;
  report(3, pass, "HMC correctness on a standard normal",
         fmt("KS passes %.0f/10, worst |mean|/MCSE %.2f, worst var dev %.3f",
             ks_pass, worst_z, worst_var - 1.0));
}

// ---------------------------------------------------------------- criterion 4
void criterion_batch_means_ar1() {
  const long n = 50000;
  const int l = 4;
  const int b = static_cast<int>(std::sqrt(static_cast<double>(n)));
  CounterRng rng(4001, 1);
  oracle::Chains chains(l);
  for (auto& ch : chains) {
    const auto x = oracle::ar1(n, 0.9, 100.0, rng);
    for (double v : x) ch.push_back(std::log(v));
  }
  const auto acc = oracle::feed(chains, b, 5, std::log(100.0));
  const auto fs = logs_fold_score(acc, n);
  const double f_hat = std::exp(fs.log_f_hat);
  const double sigma2 = fs.mc_contribution * f_hat * f_hat;
  const double ess_ratio = fs.ess / (static_cast<double>(l) * n);
  const bool pass = std::fabs(sigma2 - 19.0) < 0.30 * 19.0 &&
                    std::fabs(ess_ratio - 0.0526) < 0.50 * 0.0526;
  report(4, pass, "batch-means calibration on AR(1) rho=0.9",
         fmt("limiting var %.2f (want 19 +/- 30%%), ESS/(LN) %.4f "
             "(want 0.0526 +/- 50%%)",
             sigma2, ess_ratio));
}

// ---------------------------------------------------------------- criterion 5
void criterion_example1_selection() {
  int prob_ok = 0;
  bool ordering_ok = true;
  double min_prob = 1.0;
  for (int seed = 0; seed < 10; ++seed) {
    GroupedSimOptions opt;
    opt.min_omitted_beta = 1.0;
    const auto sim = simulate_grouped_regression(opt, 500 + seed);
    const auto folds = make_logo_scheme(sim.data);
    GroupedRegressionModel ma("M_A", sim.data, folds, {1, 1, 1, 1});
    GroupedRegressionModel mb("M_B", sim.data, folds, {1, 1, 1, 0});

    RunConfig cfg;
    cfg.seed = 9000 + seed;
    cfg.chains = 4;
    cfg.iters = 1000;
    cfg.warmup = 100;
    cfg.batch_size = 50;
    cfg.blocks = 5;
    cfg.bench_draws = 50;
    cfg.checkpoint_every = 500;
    cfg.fd_chains = 4;
    cfg.fd_warmup = 800;
    cfg.fd_draws = 1000;
    cfg.n_leapfrog = 16;

    const Model* models[2] = {&ma, &mb};
    const auto rep = run_pcv_with_fits({models, 2}, cfg);
    min_prob = std::min(min_prob, rep.prob_a_better);
    if (rep.prob_a_better > 0.9) ++prob_ok;
    for (const auto& snap : rep.snapshots)
      if (snap.iteration >= 500 && !(snap.mcse < snap.epistemic_se))
        ordering_ok = false;
  }
  const bool pass = prob_ok >= 8 && ordering_ok;
  report(5, pass, "grouped-regression model selection (LOGO, K=50, L=4)",
         fmt("prob>0.9 on %.0f/10 seeds (min %.3f)", prob_ok, min_prob) +
             (ordering_ok ? ", MCSE<epistemic holds" : ", MCSE<epistemic FAILS"));
}

// Shared harness for the benchmark criteria: K=10 folds of well-mixed score
// chains (autocorrelated, fold-specific locations), with an optional
// corruption of fold 2, chain 0. Each chain starts overdispersed, the way
// sampler initializations are; healthy chains forget the start within a few
// steps, a stuck chain repeats it for the whole run.
enum class Corruption { None, Stuck, Shift };

Verdict corrupted_run(int seed, Corruption kind, int bench_draws) {
  const int k_folds = 10, l = 4, d_blocks = 5, b = 50;
  const long n = 1000;
  const int bad_fold = 2, bad_chain = 0;
  const double rho = 0.3;
  const std::uint64_t run_seed = 7000 + seed;

  std::vector<std::vector<ScoreAccum>> acc(k_folds);
  for (int k = 0; k < k_folds; ++k) {
    CounterRng fold_rng(run_seed, stream_key(StreamKind::Simulate,
                                             static_cast<std::uint64_t>(k)));
    const double mu_k = 2.0 * fold_rng.normal();
    for (int c = 0; c < l; ++c) {
      CounterRng rng(run_seed, stream_key(StreamKind::ChainSampling, 0,
                                          static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(c)));
      const bool stuck =
          kind == Corruption::Stuck && k == bad_fold && c == bad_chain;
      const bool shifted =
          kind == Corruption::Shift && k == bad_fold && c == bad_chain;
      const double start = mu_k + 3.0;  // overdispersed initialization
      double state = start - mu_k;
      const double innov = std::sqrt(1.0 - rho * rho);
      ScoreAccum a(b, d_blocks, n, mu_k);
      for (long i = 0; i < n; ++i) {
        state = rho * state + innov * rng.normal();
        double s = stuck ? start : mu_k + state;
        if (shifted) s += 5.0;
        a.observe(s, i);
      }
      acc[k].push_back(std::move(a));
    }
  }

  std::vector<double> rhats;
  std::vector<FoldBlockSums> blocks;
  for (int k = 0; k < k_folds; ++k) {
    const auto st = rhat_from_blocks(acc[k], n);
    rhats.push_back(st ? st->rhat : std::numeric_limits<double>::quiet_NaN());
    blocks.push_back(gather_block_sums(acc[k], n));
  }
  const double observed = rhat_max(rhats);
  const auto bench = shuffle_benchmark(blocks, bench_draws, run_seed);
  return benchmark_verdict(observed, bench, 0.99);
}

// ---------------------------------------------------------------- criterion 6
void criterion_null_calibration() {
  int pass_count = 0;
  for (int seed = 0; seed < 20; ++seed)
    if (corrupted_run(seed, Corruption::None, 500).pass) ++pass_count;
  report(6, pass_count >= 18, "shuffle-benchmark null calibration (D=5, R=500)",
         fmt("observed <= q99 on %.0f/20 clean runs", pass_count));
}

// ---------------------------------------------------------------- criterion 7
void criterion_pathology_detection() {
  int stuck_detected = 0, shift_detected = 0;
  for (int seed = 0; seed < 20; ++seed) {
    if (!corrupted_run(seed, Corruption::Stuck, 100).pass) ++stuck_detected;
    if (!corrupted_run(seed, Corruption::Shift, 100).pass) ++shift_detected;
  }
  const bool pass = stuck_detected >= 19 && shift_detected >= 19;
  report(7, pass, "pathology detection (stuck chain, +5 shift)",
         fmt("stuck flagged %.0f/20, shift flagged %.0f/20", stuck_detected,
             shift_detected));
}

// ---------------------------------------------------------------- criterion 8
void criterion_logo_closed_form() {
  CounterRng rng(8001, 1);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 5;
    const double mu_a = rng.normal();
    const double va = 0.25 + 1.0 * rng.uniform();
    const double vy = 0.5 + 1.0 * rng.uniform();
    std::vector<double> mean_wo(n), y(n);
    const double alpha_true = mu_a + std::sqrt(va) * rng.normal();
    for (int i = 0; i < n; ++i) {
      mean_wo[i] = rng.normal();
      y[i] = alpha_true + mean_wo[i] + std::sqrt(vy) * rng.normal();
    }
    const double closed = GroupedRegressionModel::logo_log_pred_unseen_group(
        y, mean_wo, mu_a, va, vy);

    const long draws = 1000000;
    std::vector<double> terms(draws);
    double max_term = -1e300;
    for (long s = 0; s < draws; ++s) {
      const double alpha = mu_a + std::sqrt(va) * rng.normal();
      double lp = 0.0;
      for (int i = 0; i < n; ++i)
        lp += normal_logpdf(y[i], alpha + mean_wo[i], vy);
      terms[s] = lp;
      max_term = std::max(max_term, lp);
    }
    long double acc = 0.0L;
    for (double t : terms) acc += std::exp((long double)(t - max_term));
    const double mc =
        max_term + std::log(static_cast<double>(acc / draws));
    worst = std::max(worst, std::fabs(closed - mc));
  }
  report(8, worst < 1e-2, "LOGO closed-form predictive vs MC marginalization",
         fmt("max |closed - MC| = %.4g over 20 parameter draws", worst));
}

// ---------------------------------------------------------------- criterion 9
void criterion_hs_dss_closed_forms() {
  bool pass = true;
  std::string detail;

  // HS degenerate-posterior closed form.
  {
    const double y = 1.7, mu = 0.4, s2 = 1.3;
    WelfordDiag acc(2);
    const double d1 = -(y - mu) / s2, d2 = -1.0 / s2;
    for (int i = 0; i < 10; ++i) {
      const double xi[2] = {d2 + d1 * d1, d1};
      acc.add(xi);
    }
    const double want = -2.0 / s2 + (y - mu) * (y - mu) / (s2 * s2);
    const double err = std::fabs(hs_fold_score(acc) - want);
    WelfordDiag at_mean(2);
    for (int i = 0; i < 10; ++i) {
      const double xi[2] = {-1.0, 0.0};
      at_mean.add(xi);
    }
    const double err2 = std::fabs(hs_fold_score(at_mean) - (-2.0));
    pass = pass && err < 1e-12 && err2 < 1e-12;
    detail += fmt("HS errs %.2g/%.2g", err, err2);
  }

  // DSS 1-D closed form plus online/two-pass equality.
  {
    CounterRng rng(9001, 1);
    WelfordAccumulator acc(1, {3.0});
    std::vector<double> draws;
    for (int i = 0; i < 2000; ++i) {
      const double v = 3.0 + 0.8 * rng.normal();
      draws.push_back(v);
      const double x[1] = {v};
      acc.add(x);
    }
    long double sum = 0.0L;
    for (double v : draws) sum += v;
    const double mean = static_cast<double>(sum / draws.size());
    long double ss = 0.0L;
    for (double v : draws) ss += (v - mean) * (v - mean);
    const double s2 = static_cast<double>(ss / (draws.size() - 1));
    const double y = 3.4;
    const double want = -std::log(s2) - (y - mean) * (y - mean) / s2;
    const double yv[1] = {y};
    const double err = oracle::rel_err(dss_fold_score(acc, yv).score, want);
    const double mean_err = oracle::rel_err(acc.mean()[0], mean);
    const double var_err = oracle::rel_err(acc.covariance()[0], s2);
    pass = pass && err < 1e-8 && mean_err < 1e-8 && var_err < 1e-8;
    detail += fmt(", DSS errs %.2g/%.2g/%.2g", err, mean_err, var_err);
  }

  report(9, pass, "HS/DSS closed forms and online/two-pass equality", detail);
}

// --------------------------------------------------------------- criterion 10
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism() {
  const std::string cli = PCV_CLI_PATH;
  bool pass = true;
  std::string detail = "byte-identical across threads 1/4/8";
  std::vector<std::string> dirs;
  const int budgets[3] = {1, 4, 8};
  for (int i = 0; i < 3; ++i) {
    const std::string dir = "acc_det_" + std::to_string(budgets[i]);
    fs::remove_all(dir);
    fs::create_directories(dir);
    dirs.push_back(dir);
    auto run = [&](const std::string& args) {
      const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
      return std::system(cmd.c_str()) == 0;
    };
    if (!run("simulate grouped-reg --J 8 --Nj 4 --seed 21 --out " + dir)) {
      pass = false;
      break;
    }
    std::ofstream cfg(dir + "/run.cfg");
    cfg << "[data]\npath = " << dir << "/grouped-reg.csv\n"
        << "response = y\ncovariates = x1,x2,x3,x4\ngroup = group\n"
        << "[scheme]\nkind = logo\n"
        << "[model]\nfamily = grouped-reg\nmask_a = 1,1,1,1\nmask_b = 1,1,1,0\n"
        << "[run]\nseed = 13\nchains = 4\niters = 300\nwarmup = 50\n"
        << "batch_size = 30\nblocks = 5\nbench_draws = 100\n"
        << "checkpoint_every = 100\nthreads = " << budgets[i] << "\n"
        << "[full_data]\nchains = 2\nwarmup = 400\ndraws = 400\nleapfrog = 12\n";
    cfg.close();
    if (!run("fit --config " + dir + "/run.cfg --out " + dir) ||
        !run("pcv --config " + dir + "/run.cfg --out " + dir)) {
      pass = false;
      break;
    }
  }
  if (pass) {
    for (const char* name :
         {"/grouped-reg.csv", "/grouped-reg_truth.json", "/model_a_bank.f64",
          "/model_b_bank.f64", "/model_a_kernel.json", "/model_b_kernel.json",
          "/report.json", "/progressive.csv", "/benchmark.csv"}) {
      const std::string a = slurp(dirs[0] + name);
      if (a.empty() || a != slurp(dirs[1] + name) || a != slurp(dirs[2] + name)) {
        pass = false;
        detail = std::string("mismatch or empty: ") + name;
        break;
      }
    }
  } else {
    detail = "pipeline command failed";
  }
  report(10, pass, "pipeline determinism across thread budgets", detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_online_two_pass();
  criterion_rhat_closed_cases();
  criterion_hmc_normal();
  criterion_batch_means_ar1();
  criterion_example1_selection();
  criterion_null_calibration();
  criterion_pathology_detection();
  criterion_logo_closed_form();
  criterion_hs_dss_closed_forms();
  criterion_determinism();
  if (g_failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
