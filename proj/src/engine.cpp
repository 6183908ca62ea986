#include "pcv/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "pcv/errors.hpp"
#include "pcv/math.hpp"

namespace pcv {

int RunConfig::effective_batch() const {
  if (batch_size > 0) return batch_size;
  return std::max(1, static_cast<int>(std::sqrt(
                         static_cast<double>(iters) * chains)));
}

void RunConfig::validate() const {
  if (chains < 2) throw invalid_input("need at least 2 chains per fold (Rhat)");
  if (iters < 1) throw invalid_input("need at least 1 sampling iteration");
  if (warmup < 0) throw invalid_input("warmup must be non-negative");
  if (iters < effective_batch())
    throw invalid_input("chain length must cover at least one batch");
  if (blocks < 1) throw invalid_input("need at least 1 shuffle block");
  if (bench_draws < 1) throw invalid_input("need at least 1 benchmark draw");
  if (checkpoint_every < 0) throw invalid_input("checkpoint_every must be >= 0");
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (threads <= 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<int>(std::min<long>(threads, n));
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

FullDataFit run_full_data(const Model& model, const RunConfig& cfg,
                          int model_id) {
  AdaptConfig ac;
  ac.chains = cfg.fd_chains;
  ac.warmup = cfg.fd_warmup;
  ac.draws = cfg.fd_draws;
  ac.n_leapfrog = cfg.n_leapfrog;
  ac.target_accept = cfg.target_accept;
  ac.init_step_size = cfg.init_step_size;
  return adapt_full_data(model, ac, cfg.seed, model_id);
}

namespace {

// Everything one (model, fold, chain) task accumulates.
struct ChainAccums {
  ScoreAccum logs;
  WelfordDiag hs;
  WelfordAccumulator dss;
};

struct ChainTask {
  int model_idx = 0;
  int fold = 0;
  int chain = 0;
  ChainState state{{}, CounterRng(), 0};
  WarmupStats warm;
  long sampling_divergences = 0;
  ChainAccums acc;
  std::vector<ChainAccums> snaps;  // one entry per checkpoint
};

struct FoldCenter {
  double c = 0.0;
  std::vector<double> hs_c;    // [C1 per obs, C2 per obs]
  std::vector<double> pred_c;  // DSS per obs
};

struct CheckpointStats {
  double delta_hat = 0.0;
  std::vector<double> delta_k;
  double mcse = 0.0;
  double sigma2 = 0.0;
  double epistemic_se = 0.0;
  double prob = 0.0;
  double ess = 0.0;
  double rhat_max = 0.0;
  std::vector<std::vector<FoldSummary>> folds;  // [model][fold]
};

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Merged statistics for one checkpoint. `pick` selects the accumulator set
// of a task at that checkpoint.
CheckpointStats compute_stats(
    std::span<const ModelInput> models, const RunConfig& cfg, int folds,
    long iter_count,
    const std::function<const ChainAccums&(const ChainTask&)>& pick,
    const std::vector<ChainTask>& tasks,
    const std::vector<char>* failed_folds) {
  const int n_models = static_cast<int>(models.size());
  const int l = cfg.chains;
  CheckpointStats out;
  out.folds.resize(n_models);

  auto task_at = [&](int m, int k, int c) -> const ChainTask& {
    return tasks[(static_cast<size_t>(m) * folds + k) * l + c];
  };

  std::vector<std::vector<double>> rhats(n_models);
  std::vector<std::vector<FoldScore>> logs_scores(n_models);
  for (int m = 0; m < n_models; ++m) {
    logs_scores[m].resize(folds);
    rhats[m].assign(folds, quiet_nan());
    out.folds[m].resize(folds);
    for (int k = 0; k < folds; ++k) {
      std::vector<ScoreAccum> chains;
      chains.reserve(l);
      for (int c = 0; c < l; ++c) chains.push_back(pick(task_at(m, k, c)).logs);
      const FoldScore fs = logs_fold_score(chains, iter_count);
      logs_scores[m][k] = fs;

      FoldSummary& sum = out.folds[m][k];
      sum.fold = k;
      sum.log_f_hat = fs.log_f_hat;
      sum.mc_contribution = fs.mc_contribution;
      sum.ess = fs.ess;
      sum.batches = fs.batches;
      sum.fault = fs.fault;
      if (cfg.score == ScoreKind::LogS) {
        sum.estimate = fs.estimate;
      } else if (cfg.score == ScoreKind::HS) {
        WelfordDiag merged = pick(task_at(m, k, 0)).hs;
        for (int c = 1; c < l; ++c) merged.merge(pick(task_at(m, k, c)).hs);
        // Classic HS is negatively oriented; report the negation.
        sum.estimate = -hs_fold_score(merged);
      } else {
        WelfordAccumulator merged = pick(task_at(m, k, 0)).dss;
        for (int c = 1; c < l; ++c) merged.merge(pick(task_at(m, k, c)).dss);
        try {
          const auto res =
              dss_fold_score(merged, models[m].model->test_values(k));
          sum.estimate = res.score;
          sum.dss_ridged = res.ridged;
        } catch (const std::exception&) {
          sum.estimate = quiet_nan();
          sum.fault = true;
        }
      }
      const auto rh = rhat_from_blocks(chains, iter_count);
      if (rh) {
        rhats[m][k] = rh->rhat;
        sum.rhat = rh->rhat;
      } else {
        sum.rhat = quiet_nan();
      }
      if (failed_folds && (*failed_folds)[k]) sum.failed = true;
    }
  }

  // A fold is excluded from the headline statistics (for every model) when
  // its chains failed or its score could not be evaluated.
  std::vector<char> excluded(folds, 0);
  for (int k = 0; k < folds; ++k) {
    if (failed_folds && (*failed_folds)[k]) excluded[k] = 1;
    if (failed_folds)
      for (int m = 0; m < n_models; ++m)
        if (std::isnan(out.folds[m][k].estimate)) excluded[k] = 1;
    if (excluded[k])
      for (int m = 0; m < n_models; ++m) out.folds[m][k].failed = true;
  }

  double naive_sum = 0.0, mc_sum = 0.0;
  bool mc_inf = false;
  std::vector<double> all_rhats;
  for (int m = 0; m < n_models; ++m)
    for (int k = 0; k < folds; ++k) {
      if (excluded[k]) continue;
      const FoldScore& fs = logs_scores[m][k];
      if (std::isfinite(fs.mc_contribution)) {
        mc_sum += fs.mc_contribution;
        naive_sum += fs.naive_contribution;
      } else {
        mc_inf = true;
      }
      all_rhats.push_back(rhats[m][k]);
    }

  out.delta_k.reserve(folds);
  std::vector<double> included_deltas;
  for (int k = 0; k < folds; ++k) {
    double dk;
    if (n_models == 2)
      dk = out.folds[0][k].estimate - out.folds[1][k].estimate;
    else
      dk = out.folds[0][k].estimate;
    out.delta_k.push_back(dk);
    if (!excluded[k]) included_deltas.push_back(dk);
  }
  out.delta_hat = 0.0;
  for (double dk : included_deltas) out.delta_hat += dk;

  if (included_deltas.size() >= 2) {
    const SelectionResult sel =
        selection_probability(out.delta_hat, included_deltas);
    out.sigma2 = sel.sigma2_delta;
    out.epistemic_se =
        std::sqrt(static_cast<double>(included_deltas.size()) * sel.sigma2_delta);
    out.prob = n_models == 2 ? sel.prob : quiet_nan();
  } else {
    out.sigma2 = quiet_nan();
    out.epistemic_se = quiet_nan();
    out.prob = quiet_nan();
  }

  if (cfg.score == ScoreKind::LogS) {
    const double ln = static_cast<double>(l) * iter_count;
    out.mcse = mc_inf ? std::numeric_limits<double>::infinity()
                      : std::sqrt(mc_sum / ln);
  } else {
    out.mcse = quiet_nan();
  }
  out.ess = mc_sum > 0.0 ? static_cast<double>(l) * iter_count * naive_sum / mc_sum
                         : quiet_nan();
  try {
    out.rhat_max = rhat_max(all_rhats);
  } catch (const undefined_diagnostic&) {
    out.rhat_max = quiet_nan();
  }
  return out;
}

}  // namespace

PcvReport run_pcv(std::span<const ModelInput> models, const RunConfig& cfg) {
  cfg.validate();
  if (models.empty() || models.size() > 2)
    throw invalid_input("run_pcv takes one or two models");
  const int folds = models[0].model->fold_count();
  for (const auto& mi : models) {
    if (mi.model->fold_count() != folds)
      throw invalid_input("models must share one fold assignment");
    if (mi.fit == nullptr || mi.fit->draws.empty())
      throw invalid_input("full-data draws missing for model " +
                          mi.model->name());
    mi.model->check_score_support(cfg.score);
  }
  if (folds < 2)
    throw invalid_input("uncertainty estimates need at least 2 folds");

  const int n_models = static_cast<int>(models.size());
  const int l = cfg.chains;
  const long n = cfg.iters;
  const int b = cfg.effective_batch();

  // Checkpoint schedule always ends at N.
  std::vector<long> checkpoints;
  if (cfg.checkpoint_every > 0)
    for (long t = cfg.checkpoint_every; t < n; t += cfg.checkpoint_every)
      checkpoints.push_back(t);
  checkpoints.push_back(n);

  std::vector<ChainTask> tasks(static_cast<size_t>(n_models) * folds * l);
  for (int m = 0; m < n_models; ++m)
    for (int k = 0; k < folds; ++k)
      for (int c = 0; c < l; ++c) {
        ChainTask& t = tasks[(static_cast<size_t>(m) * folds + k) * l + c];
        t.model_idx = m;
        t.fold = k;
        t.chain = c;
      }

  // Step 2: warm-start and short warm-up, accumulating centering sums.
  parallel_for(static_cast<long>(tasks.size()), cfg.thread_budget, [&](long i) {
    ChainTask& t = tasks[i];
    const ModelInput& mi = models[t.model_idx];
    const std::uint64_t stream_model =
        cfg.shared_streams ? 0u : static_cast<std::uint64_t>(mi.model_id);
    CounterRng init_rng(cfg.seed, stream_key(StreamKind::ChainInit, stream_model,
                                             static_cast<std::uint64_t>(t.fold),
                                             static_cast<std::uint64_t>(t.chain)));
    const auto& bank = mi.fit->draws;
    t.state.position = bank[init_rng.below(bank.size())];
    t.state.rng = CounterRng(cfg.seed, stream_key(StreamKind::ChainSampling,
                                                  stream_model,
                                                  static_cast<std::uint64_t>(t.fold),
                                                  static_cast<std::uint64_t>(t.chain)));
    HmcWorkspace ws;
    t.warm = warmup_discard(t.state, *mi.model, t.fold, mi.fit->kparams,
                            cfg.warmup, cfg.score, ws);
  });

  // Centering constants per (model, fold).
  std::vector<std::vector<FoldCenter>> centers(n_models);
  for (int m = 0; m < n_models; ++m) {
    centers[m].resize(folds);
    for (int k = 0; k < folds; ++k) {
      FoldCenter& fc = centers[m][k];
      const long msize = models[m].model->test_size(k);
      fc.hs_c.assign(2 * msize, 0.0);
      fc.pred_c.assign(msize, 0.0);
      if (cfg.warmup == 0) continue;  // C = 0 when warm-up is skipped
      const double denom = static_cast<double>(l) * cfg.warmup;
      for (int c = 0; c < l; ++c) {
        const ChainTask& t = tasks[(static_cast<size_t>(m) * folds + k) * l + c];
        fc.c += t.warm.logpred_sum / denom;
        if (cfg.score == ScoreKind::HS)
          for (long i = 0; i < msize; ++i) {
            fc.hs_c[i] += t.warm.hs1_sum[i] / denom;
            fc.hs_c[msize + i] += t.warm.hs2_sum[i] / denom;
          }
        if (cfg.score == ScoreKind::DSS)
          for (long i = 0; i < msize; ++i)
            fc.pred_c[i] += t.warm.pred_sum[i] / denom;
      }
    }
  }

  // Step 3: sampling, feeding the online accumulators.
  parallel_for(static_cast<long>(tasks.size()), cfg.thread_budget, [&](long i) {
    ChainTask& t = tasks[i];
    const ModelInput& mi = models[t.model_idx];
    const Model& model = *mi.model;
    const FoldCenter& fc = centers[t.model_idx][t.fold];
    const long msize = model.test_size(t.fold);

    t.acc.logs = ScoreAccum(b, cfg.blocks, n, fc.c);
    if (cfg.score == ScoreKind::HS)
      t.acc.hs = WelfordDiag(static_cast<int>(2 * msize), fc.hs_c);
    if (cfg.score == ScoreKind::DSS)
      t.acc.dss = WelfordAccumulator(static_cast<int>(msize), fc.pred_c);

    HmcWorkspace ws;
    std::vector<double> d1(msize), d2(msize), xi(2 * msize), draw(msize);
    const long divergences_before = t.state.divergences;
    size_t next_checkpoint = 0;
    for (long iter = 0; iter < n; ++iter) {
      hmc_step(t.state, model, t.fold, mi.fit->kparams, ws);
      const double s = model.log_pred(t.state.position, t.fold);
      t.acc.logs.observe(s, iter);
      if (cfg.score == ScoreKind::HS) {
        model.pred_derivs(t.state.position, t.fold, d1, d2);
        for (long o = 0; o < msize; ++o) {
          xi[o] = d2[o] + d1[o] * d1[o];
          xi[msize + o] = d1[o];
        }
        t.acc.hs.add(xi);
      } else if (cfg.score == ScoreKind::DSS) {
        model.pred_sample(t.state.position, t.fold, t.state.rng, draw);
        t.acc.dss.add(draw);
      }
      if (next_checkpoint < checkpoints.size() &&
          iter + 1 == checkpoints[next_checkpoint]) {
        t.snaps.push_back(t.acc);
        ++next_checkpoint;
      }
    }
    t.sampling_divergences = t.state.divergences - divergences_before;
  });

  // Failed folds: every chain divergent on more than half the iterations,
  // in any model. Exclusions apply to the headline statistics of both models.
  std::vector<char> failed(folds, 0);
  for (int k = 0; k < folds; ++k)
    for (int m = 0; m < n_models && !failed[k]; ++m) {
      bool all_bad = true;
      for (int c = 0; c < l; ++c) {
        const ChainTask& t = tasks[(static_cast<size_t>(m) * folds + k) * l + c];
        if (t.sampling_divergences * 2 <= n) {
          all_bad = false;
          break;
        }
      }
      if (all_bad) failed[k] = 1;
    }

  // Step 4: merge, diagnose, report.
  PcvReport rep;
  rep.folds = folds;
  rep.chains = l;
  rep.iters = n;
  rep.warmup = cfg.warmup;
  rep.batch_size = b;
  rep.blocks = cfg.blocks;
  rep.seed = cfg.seed;
  rep.score = cfg.score;

  for (size_t ci = 0; ci < checkpoints.size(); ++ci) {
    const long t_iter = checkpoints[ci];
    auto pick = [&](const ChainTask& t) -> const ChainAccums& {
      return t.snaps[ci];
    };
    const CheckpointStats st = compute_stats(models, cfg, folds, t_iter, pick,
                                             tasks, ci + 1 == checkpoints.size()
                                                        ? &failed
                                                        : nullptr);
    Snapshot snap;
    snap.iteration = t_iter;
    snap.delta_hat = st.delta_hat;
    snap.mcse = st.mcse;
    snap.epistemic_se = st.epistemic_se;
    snap.prob_a_better = st.prob;
    snap.ess = st.ess;
    snap.rhat_max = st.rhat_max;
    rep.snapshots.push_back(snap);

    if (ci + 1 == checkpoints.size()) {
      rep.delta_hat = st.delta_hat;
      rep.delta_k = st.delta_k;
      rep.mcse = st.mcse;
      rep.sigma2_delta = st.sigma2;
      rep.epistemic_se = st.epistemic_se;
      rep.prob_a_better = st.prob;
      rep.ess_overall = st.ess;
      rep.rhat_max = st.rhat_max;
      for (int m = 0; m < n_models; ++m) {
        ModelReport mr;
        mr.name = models[m].model->name();
        mr.model_id = models[m].model_id;
        mr.folds = st.folds[m];
        mr.divergences.resize(folds);
        for (int k = 0; k < folds; ++k) {
          mr.divergences[k].resize(l);
          for (int c = 0; c < l; ++c)
            mr.divergences[k][c] =
                tasks[(static_cast<size_t>(m) * folds + k) * l + c]
                    .sampling_divergences;
          const FoldSummary& fs = mr.folds[k];
          if (fs.failed) mr.failed_folds.push_back(k);
          if (!fs.failed) mr.score_total += fs.estimate;
          if (fs.fault) ++mr.numeric_faults;
          if (!std::isfinite(fs.rhat) && !fs.failed) ++mr.rhat_excluded;
        }
        rep.models.push_back(std::move(mr));
      }
    }
  }

  // Dropped partial-batch draws, summed over chains and models.
  for (const auto& t : tasks) rep.dropped_batch_draws += t.acc.logs.batch.dropped();

  // Shuffle benchmark over the union of both models' folds.
  std::vector<FoldBlockSums> block_sums;
  for (int m = 0; m < n_models; ++m)
    for (int k = 0; k < folds; ++k) {
      if (failed[k]) continue;
      std::vector<ScoreAccum> chains;
      for (int c = 0; c < l; ++c)
        chains.push_back(tasks[(static_cast<size_t>(m) * folds + k) * l + c]
                             .acc.logs);
      block_sums.push_back(gather_block_sums(chains, n));
    }
  rep.benchmark = shuffle_benchmark(block_sums, cfg.bench_draws, cfg.seed);
  if (std::isfinite(rep.rhat_max) && !rep.benchmark.values.empty())
    rep.verdict =
        benchmark_verdict(rep.rhat_max, rep.benchmark, cfg.bench_quantile);
  else
    rep.verdict = Verdict{true, cfg.bench_quantile, quiet_nan(), rep.rhat_max};

  return rep;
}

PcvReport run_masked_pair(const Model& model_a, const Model& model_b,
                          const RunConfig& cfg) {
  if (model_a.dim() != model_b.dim())
    throw invalid_input("masked pair must share one parameter space");
  const Model* models[2] = {&model_a, &model_b};
  return run_pcv_with_fits({models, 2}, cfg);
}

PcvReport run_pcv_with_fits(std::span<const Model* const> models,
                            const RunConfig& cfg) {
  std::vector<FullDataFit> fits;
  fits.reserve(models.size());
  for (size_t m = 0; m < models.size(); ++m)
    fits.push_back(run_full_data(*models[m], cfg, static_cast<int>(m)));
  std::vector<ModelInput> inputs;
  for (size_t m = 0; m < models.size(); ++m)
    inputs.push_back(ModelInput{models[m], &fits[m], static_cast<int>(m)});
  return run_pcv(inputs, cfg);
}

}  // namespace pcv
