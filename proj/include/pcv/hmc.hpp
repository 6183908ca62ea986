#pragma once

// Fixed-trajectory Hamiltonian Monte Carlo with a diagonal mass matrix.
// The kernel is a pure transition on ChainState; chains never communicate.

#include <span>
#include <vector>

#include "pcv/model.hpp"
#include "pcv/rng.hpp"

namespace pcv {

struct KernelParams {
  double step_size = 0.1;
  int n_leapfrog = 10;
  std::vector<double> inv_mass_diag;  // length = model dim, all > 0
};

struct ChainState {
  std::vector<double> position;
  CounterRng rng;
  long divergences = 0;  // E, non-decreasing
};

struct StepInfo {
  bool accepted = false;
  bool divergent = false;
  double accept_prob = 0.0;
  double delta_h = 0.0;
};

// Scratch buffers so the hot loop never allocates.
struct HmcWorkspace {
  std::vector<double> momentum;
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> grad;
  void resize(int dim) {
    momentum.resize(dim);
    q.resize(dim);
    p.resize(dim);
    grad.resize(dim);
  }
};

// Standard leapfrog: half-step momentum, alternating full steps, final
// half-step. Returns false (and leaves q/p at the inputs) if any
// intermediate value is non-finite.
bool leapfrog(std::span<double> q, std::span<double> p, const Model& model,
              int fold_id, double step_size, int n_steps,
              std::span<const double> inv_mass_diag, std::span<double> grad);

// One HMC transition: fresh momentum from N(0, M), leapfrog, Metropolis
// accept/reject. Divergences (|dH| > 1000 with finite dH, NaN energy error,
// or a non-finite trajectory) are always rejected and increment E.
StepInfo hmc_step(ChainState& state, const Model& model, int fold_id,
                  const KernelParams& kp, HmcWorkspace& ws);

// Warm-start positions: K*L independent uniform draws (with replacement)
// from the full-data draw bank, keyed by (seed, model_id, fold, chain).
std::vector<std::vector<std::vector<double>>> init_fold_chains(
    const std::vector<std::vector<double>>& full_data_draws, int K, int L,
    std::uint64_t seed, int model_id);

// Sums of warm-up score draws, used to fix the centering constants.
struct WarmupStats {
  double logpred_sum = 0.0;
  std::vector<double> hs1_sum;  // per test observation
  std::vector<double> hs2_sum;
  std::vector<double> pred_sum;  // per test observation (DSS draws)
  long steps = 0;
};

// Advances one chain n_wu steps, discarding draws but accumulating the side
// sums needed for centering. Kernel parameters are never re-adapted.
WarmupStats warmup_discard(ChainState& chain, const Model& model, int fold_id,
                           const KernelParams& kp, long n_wu, ScoreKind score,
                           HmcWorkspace& ws);

}  // namespace pcv
