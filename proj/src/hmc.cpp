#include "pcv/hmc.hpp"

#include <cmath>

#include "pcv/errors.hpp"
#include "pcv/math.hpp"

namespace pcv {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

constexpr double kDivergenceThreshold = 1000.0;

}  // namespace

bool leapfrog(std::span<double> q, std::span<double> p, const Model& model,
              int fold_id, double step_size, int n_steps,
              std::span<const double> inv_mass_diag, std::span<double> grad) {
  const int d = static_cast<int>(q.size());
  std::vector<double> q0(q.begin(), q.end());
  std::vector<double> p0(p.begin(), p.end());

  auto bail = [&] {
    for (int i = 0; i < d; ++i) {
      q[i] = q0[i];
      p[i] = p0[i];
    }
    return false;
  };

  model.grad_log_joint(q, fold_id, grad);
  if (!all_finite(grad)) return bail();
  const double half = 0.5 * step_size;
  for (int i = 0; i < d; ++i) p[i] += half * grad[i];
  for (int step = 0; step < n_steps; ++step) {
    for (int i = 0; i < d; ++i) q[i] += step_size * inv_mass_diag[i] * p[i];
    if (!all_finite(q)) return bail();
    model.grad_log_joint(q, fold_id, grad);
    if (!all_finite(grad)) return bail();
    const double scale = (step == n_steps - 1) ? half : step_size;
    for (int i = 0; i < d; ++i) p[i] += scale * grad[i];
    if (!all_finite(p)) return bail();
  }
  return true;
}

StepInfo hmc_step(ChainState& state, const Model& model, int fold_id,
                  const KernelParams& kp, HmcWorkspace& ws) {
  const int d = static_cast<int>(state.position.size());
  ws.resize(d);
  StepInfo info;

  // Fresh momentum from N(0, M), M = diag(1 / inv_mass_diag).
  for (int i = 0; i < d; ++i)
    ws.momentum[i] = state.rng.normal() / std::sqrt(kp.inv_mass_diag[i]);

  auto kinetic = [&](std::span<const double> p) {
    double k = 0.0;
    for (int i = 0; i < d; ++i) k += kp.inv_mass_diag[i] * p[i] * p[i];
    return 0.5 * k;
  };

  const double h0 =
      -model.log_joint(state.position, fold_id) + kinetic(ws.momentum);
  for (int i = 0; i < d; ++i) {
    ws.q[i] = state.position[i];
    ws.p[i] = ws.momentum[i];
  }
  const bool ok = leapfrog(ws.q, ws.p, model, fold_id, kp.step_size,
                           kp.n_leapfrog, kp.inv_mass_diag, ws.grad);
  const double h1 = ok ? -model.log_joint(ws.q, fold_id) + kinetic(ws.p)
                       : std::numeric_limits<double>::quiet_NaN();
  const double dh = h1 - h0;
  info.delta_h = dh;

  // A clean +inf dh (proposal with zero posterior density) is an ordinary
  // rejection; NaN or a large finite energy error is a divergence.
  const bool divergent =
      !ok || std::isnan(dh) || (std::isfinite(dh) && std::fabs(dh) > kDivergenceThreshold);
  if (divergent) {
    info.divergent = true;
    ++state.divergences;
    return info;
  }

  info.accept_prob = dh <= 0.0 ? 1.0 : std::exp(-dh);
  const double u = state.rng.uniform();
  if (std::log(u) < -dh) {
    info.accepted = true;
    for (int i = 0; i < d; ++i) state.position[i] = ws.q[i];
  }
  return info;
}

std::vector<std::vector<std::vector<double>>> init_fold_chains(
    const std::vector<std::vector<double>>& full_data_draws, int K, int L,
    std::uint64_t seed, int model_id) {
  if (full_data_draws.empty())
    throw invalid_input("empty full-data draw bank");
  const std::uint64_t n = full_data_draws.size();
  std::vector<std::vector<std::vector<double>>> out(K);
  for (int k = 0; k < K; ++k) {
    out[k].resize(L);
    for (int l = 0; l < L; ++l) {
      CounterRng rng(seed, stream_key(StreamKind::ChainInit,
                                      static_cast<std::uint64_t>(model_id),
                                      static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(l)));
      out[k][l] = full_data_draws[rng.below(n)];
    }
  }
  return out;
}

WarmupStats warmup_discard(ChainState& chain, const Model& model, int fold_id,
                           const KernelParams& kp, long n_wu, ScoreKind score,
                           HmcWorkspace& ws) {
  WarmupStats stats;
  const long m = model.test_size(fold_id);
  if (score == ScoreKind::HS) {
    stats.hs1_sum.assign(m, 0.0);
    stats.hs2_sum.assign(m, 0.0);
  } else if (score == ScoreKind::DSS) {
    stats.pred_sum.assign(m, 0.0);
  }
  std::vector<double> d1(m), d2(m), draw(m);
  for (long i = 0; i < n_wu; ++i) {
    hmc_step(chain, model, fold_id, kp, ws);
    stats.logpred_sum += model.log_pred(chain.position, fold_id);
    if (score == ScoreKind::HS) {
      model.pred_derivs(chain.position, fold_id, d1, d2);
      for (long t = 0; t < m; ++t) {
        stats.hs1_sum[t] += d2[t] + d1[t] * d1[t];
        stats.hs2_sum[t] += d1[t];
      }
    } else if (score == ScoreKind::DSS) {
      model.pred_sample(chain.position, fold_id, chain.rng, draw);
      for (long t = 0; t < m; ++t) stats.pred_sum[t] += draw[t];
    }
    ++stats.steps;
  }
  return stats;
}

}  // namespace pcv
