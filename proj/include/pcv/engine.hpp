#pragma once

// Orchestrates the four-step workflow: full-data fit, warm-started fold
// chains, parallel sampling into online accumulators, and the merged report.
// One task owns one (model, fold, chain); merges happen on the coordinator
// in a fixed order, so reports are bit-identical for any thread budget.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pcv/adapt.hpp"
#include "pcv/diagnostics.hpp"
#include "pcv/model.hpp"
#include "pcv/scoring.hpp"

namespace pcv {

struct RunConfig {
  int chains = 4;        // L, chains per fold
  long iters = 1000;     // N, sampling iterations per chain
  long warmup = 100;     // N_wu, fold warm-up iterations
  int batch_size = 50;   // b; 0 picks floor(sqrt(N*L))
  int blocks = 5;        // D, shuffle blocks
  int bench_draws = 500; // R, benchmark replicates
  double bench_quantile = 0.99;
  std::uint64_t seed = 1;
  ScoreKind score = ScoreKind::LogS;
  long checkpoint_every = 0;  // 0 = final snapshot only
  int thread_budget = 0;      // 0 = hardware concurrency
  bool shared_streams = false;  // key both models' chains identically

  // full-data phase
  int fd_chains = 4;
  long fd_warmup = 1000;
  long fd_draws = 2000;
  int n_leapfrog = 32;
  double target_accept = 0.8;
  double init_step_size = 0.0;

  int effective_batch() const;
  void validate() const;
};

struct ModelInput {
  const Model* model = nullptr;
  const FullDataFit* fit = nullptr;
  int model_id = 0;
};

struct Snapshot {
  long iteration = 0;
  double delta_hat = 0.0;
  double mcse = 0.0;
  double epistemic_se = 0.0;
  double prob_a_better = 0.0;
  double ess = 0.0;
  double rhat_max = 0.0;
};

struct FoldSummary {
  int fold = -1;
  double estimate = 0.0;  // positively oriented, per the configured score
  double log_f_hat = 0.0;
  double mc_contribution = 0.0;
  double ess = 0.0;
  double rhat = 0.0;  // NaN when undefined
  long batches = 0;
  bool fault = false;
  bool failed = false;  // excluded from headline statistics
  bool dss_ridged = false;
};

struct ModelReport {
  std::string name;
  int model_id = 0;
  std::vector<FoldSummary> folds;
  std::vector<std::vector<long>> divergences;  // [fold][chain], sampling phase
  std::vector<int> failed_folds;
  double score_total = 0.0;  // sum of included fold estimates
  long numeric_faults = 0;
  int rhat_excluded = 0;
};

struct PcvReport {
  int folds = 0;
  int chains = 0;
  long iters = 0;
  long warmup = 0;
  int batch_size = 0;
  int blocks = 0;
  std::uint64_t seed = 0;
  ScoreKind score = ScoreKind::LogS;

  std::vector<ModelReport> models;
  double delta_hat = 0.0;  // = score_total for single-model runs
  std::vector<double> delta_k;
  double mcse = 0.0;          // NaN for HS/DSS
  double sigma2_delta = 0.0;  // sample variance of fold contributions
  double epistemic_se = 0.0;  // sqrt(K * sigma2)
  double prob_a_better = 0.0; // NaN for single-model runs
  double ess_overall = 0.0;
  double rhat_max = 0.0;
  long dropped_batch_draws = 0;
  BenchmarkDraws benchmark;
  Verdict verdict;
  std::vector<Snapshot> snapshots;
};

// Step 1: adaptation plus sampling on the full-data sentinel fold.
FullDataFit run_full_data(const Model& model, const RunConfig& cfg,
                          int model_id);

// Steps 2-4 for one or two models sharing a fold count.
PcvReport run_pcv(std::span<const ModelInput> models, const RunConfig& cfg);

// Convenience: full-data fits followed by run_pcv.
PcvReport run_pcv_with_fits(std::span<const Model* const> models,
                            const RunConfig& cfg);

// Nested pair sharing one parameter space (e.g. two covariate masks of one
// family): both models' chains advance in one task pool. Equivalent to
// run_pcv over separately constructed nested models.
PcvReport run_masked_pair(const Model& model_a, const Model& model_b,
                          const RunConfig& cfg);

// Bounded task pool; fn(i) is called once for each i in [0, n).
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

}  // namespace pcv
