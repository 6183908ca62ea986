#include "pcv/adapt.hpp"

#include <algorithm>
#include <cmath>

#include "pcv/accum.hpp"
#include "pcv/errors.hpp"
#include "pcv/math.hpp"

namespace pcv {

namespace {

// Crude bisection-by-doubling for a starting step size: move until the
// single-step acceptance probability crosses 0.5.
double find_initial_step(const Model& model, int fold,
                         const std::vector<double>& position,
                         const std::vector<double>& inv_mass,
                         std::uint64_t seed, int model_id) {
  double eps = 1.0;
  HmcWorkspace ws;
  auto probe = [&](double e) {
    ChainState probe_state{position,
                           CounterRng(seed, stream_key(StreamKind::StepInit,
                                                       static_cast<std::uint64_t>(model_id))),
                           0};
    KernelParams kp{e, 1, inv_mass};
    const StepInfo info = hmc_step(probe_state, model, fold, kp, ws);
    return info.divergent ? 0.0 : info.accept_prob;
  };
  double ap = probe(eps);
  const bool go_up = ap > 0.5;
  for (int i = 0; i < 50; ++i) {
    if (go_up) {
      eps *= 2.0;
      if (probe(eps) <= 0.5) return eps / 2.0;
    } else {
      eps *= 0.5;
      if (probe(eps) > 0.5) return eps;
    }
  }
  return go_up ? eps : 1e-8;
}

// Simple Rhat (no splitting) over one parameter's stored draws.
double param_rhat(const std::vector<std::vector<double>>& chains) {
  const int l = static_cast<int>(chains.size());
  const long n = static_cast<long>(chains[0].size());
  double w = 0.0, grand = 0.0;
  std::vector<double> means(l);
  for (int c = 0; c < l; ++c) {
    double m = 0.0;
    for (double v : chains[c]) m += v;
    m /= n;
    means[c] = m;
    grand += m / l;
    double s = 0.0;
    for (double v : chains[c]) s += (v - m) * (v - m);
    w += s / (n - 1) / l;
  }
  double b = 0.0;
  for (int c = 0; c < l; ++c) b += (means[c] - grand) * (means[c] - grand);
  b *= static_cast<double>(n) / (l - 1);
  if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

// Batch-means ESS of one parameter across chains.
double param_ess(const std::vector<std::vector<double>>& chains, int b) {
  const int l = static_cast<int>(chains.size());
  const long n = static_cast<long>(chains[0].size());
  const long a = n / b;
  if (a < 2) return std::numeric_limits<double>::quiet_NaN();
  double grand = 0.0;
  for (const auto& ch : chains)
    for (double v : ch) grand += v;
  grand /= static_cast<double>(l) * n;
  double ss_naive = 0.0, ss_batch = 0.0;
  for (const auto& ch : chains) {
    for (double v : ch) ss_naive += (v - grand) * (v - grand);
    for (long h = 0; h < a; ++h) {
      double bm = 0.0;
      for (long i = h * b; i < (h + 1) * b; ++i) bm += ch[i];
      bm /= b;
      ss_batch += (bm - grand) * (bm - grand);
    }
  }
  const double s2 = ss_naive / (static_cast<double>(l) * n - 1);
  const double sigma2 = b * ss_batch / (static_cast<double>(l) * a - 1);
  if (!(sigma2 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(l) * n * s2 / sigma2;
}

}  // namespace

FullDataFit adapt_full_data(const Model& model, const AdaptConfig& cfg,
                            std::uint64_t seed, int model_id) {
  const int d = model.dim();
  if (d < 1) throw invalid_input("model has no parameters");
  if (cfg.chains < 1 || cfg.warmup < 1 || cfg.draws < 1)
    throw invalid_input("full-data config needs chains, warmup, draws >= 1");
  const int sentinel = model.fold_count();
  const int l = cfg.chains;

  std::vector<ChainState> chains;
  chains.reserve(l);
  for (int c = 0; c < l; ++c) {
    CounterRng rng(seed, stream_key(StreamKind::FullData,
                                    static_cast<std::uint64_t>(model_id),
                                    static_cast<std::uint64_t>(c)));
    chains.push_back(ChainState{model.initial_draw(rng), rng, 0});
  }

  KernelParams kp;
  kp.n_leapfrog = cfg.n_leapfrog;
  kp.inv_mass_diag.assign(d, 1.0);
  kp.step_size = cfg.init_step_size > 0.0
                     ? cfg.init_step_size
                     : find_initial_step(model, sentinel, chains[0].position,
                                         kp.inv_mass_diag, seed, model_id);

  DualAveraging da;
  da.target = cfg.target_accept;
  da.restart(kp.step_size);

  // Window layout: a fast interval for step size only, doubling slow windows
  // for the mass matrix, and a final fast interval.
  const long w_total = cfg.warmup;
  const long w_init = std::min<long>(75, std::max<long>(1, w_total * 15 / 100));
  const long w_final = std::min<long>(50, std::max<long>(1, w_total / 10));
  long window = 25;
  long window_end = std::min(w_total - w_final, w_init + window);

  WelfordDiag mass_acc(d);
  HmcWorkspace ws;
  long window_divergent = 0, window_steps = 0;
  double accept_sum = 0.0;
  long total_divergent = 0;

  for (long iter = 0; iter < w_total; ++iter) {
    kp.step_size = da.current();
    double ap = 0.0;
    long n_div = 0;
    for (auto& chain : chains) {
      const StepInfo info = hmc_step(chain, model, sentinel, kp, ws);
      ap += info.divergent ? 0.0 : info.accept_prob;
      n_div += info.divergent;
    }
    ap /= l;
    da.update(ap);
    accept_sum += ap;
    total_divergent += n_div;
    window_divergent += n_div;
    window_steps += l;

    const bool in_slow = iter >= w_init && iter < w_total - w_final;
    if (in_slow)
      for (const auto& chain : chains) mass_acc.add(chain.position);

    if (in_slow && iter + 1 == window_end) {
      if (mass_acc.count() >= 2) {
        const auto var = mass_acc.variance();
        const double n = static_cast<double>(mass_acc.count());
        for (int i = 0; i < d; ++i) {
          // Shrink toward a small diagonal, as Stan's window adaptation does.
          const double v = var[i] * (n / (n + 5.0)) + 1e-3 * (5.0 / (n + 5.0));
          kp.inv_mass_diag[i] = std::max(v, 1e-10);
        }
      }
      mass_acc = WelfordDiag(d);
      da.restart(da.current());
      window *= 2;
      // Absorb a too-short trailing window into this one.
      long next_end = window_end + window;
      if (next_end + 2 * window > w_total - w_final) next_end = w_total - w_final;
      window_end = next_end;
    }

    // Persistent-failure check over trailing spans of 100 iterations.
    if (window_steps >= 100 * l) {
      if (window_divergent > window_steps / 2) {
        std::vector<std::vector<double>> last;
        for (const auto& chain : chains) last.push_back(chain.position);
        throw adaptation_failure(
            "full-data adaptation failed: chains diverging persistently",
            std::move(last));
      }
      window_divergent = 0;
      window_steps = 0;
    }
  }

  kp.step_size = da.averaged();

  FullDataFit fit;
  fit.kparams = kp;
  fit.draws.reserve(static_cast<size_t>(l) * cfg.draws);
  std::vector<std::vector<std::vector<double>>> per_param(
      d, std::vector<std::vector<double>>(l));
  for (int p = 0; p < d; ++p)
    for (int c = 0; c < l; ++c) per_param[p][c].reserve(cfg.draws);

  double sample_accept = 0.0;
  for (long iter = 0; iter < cfg.draws; ++iter) {
    for (int c = 0; c < l; ++c) {
      const StepInfo info = hmc_step(chains[c], model, sentinel, kp, ws);
      sample_accept += info.divergent ? 0.0 : info.accept_prob;
      fit.divergences += info.divergent;
      fit.draws.push_back(chains[c].position);
      for (int p = 0; p < d; ++p) per_param[p][c].push_back(chains[c].position[p]);
    }
  }
  fit.mean_accept = sample_accept / (static_cast<double>(l) * cfg.draws);

  const int ess_b = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(cfg.draws))));
  for (int p = 0; p < d; ++p) {
    fit.rhat_per_param.push_back(param_rhat(per_param[p]));
    fit.ess_per_param.push_back(param_ess(per_param[p], ess_b));
  }
  return fit;
}

}  // namespace pcv
