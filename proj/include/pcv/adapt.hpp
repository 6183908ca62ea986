#pragma once

// Full-data warmup: dual-averaging step-size adaptation (Hoffman & Gelman,
// 2014) with a diagonal mass matrix re-estimated over doubling windows,
// followed by a frozen sampling phase that fills the warm-start draw bank.

#include <cstdint>
#include <vector>

#include "pcv/hmc.hpp"
#include "pcv/model.hpp"

namespace pcv {

struct DualAveraging {
  double target = 0.8;
  double gamma = 0.05;
  double t0 = 10.0;
  double kappa = 0.75;

  double mu = 0.0;
  double log_eps = 0.0;
  double log_eps_bar = 0.0;
  double h_bar = 0.0;
  long iter = 0;

  void restart(double step_size) {
    mu = std::log(10.0 * step_size);
    log_eps = std::log(step_size);
    log_eps_bar = log_eps;
    h_bar = 0.0;
    iter = 0;
  }
  void update(double accept_prob) {
    ++iter;
    const double w = 1.0 / (iter + t0);
    h_bar = (1.0 - w) * h_bar + w * (target - accept_prob);
    log_eps = mu - std::sqrt(static_cast<double>(iter)) / gamma * h_bar;
    const double w2 = std::pow(static_cast<double>(iter), -kappa);
    log_eps_bar = w2 * log_eps + (1.0 - w2) * log_eps_bar;
  }
  double current() const { return std::exp(log_eps); }
  double averaged() const { return std::exp(log_eps_bar); }
};

struct AdaptConfig {
  int chains = 4;       // L_fd
  long warmup = 1000;   // adaptation iterations per chain
  long draws = 2000;    // post-warmup draws per chain (the bank)
  int n_leapfrog = 32;
  double target_accept = 0.8;
  double init_step_size = 0.0;  // 0 = search from the first chain's start
};

struct FullDataFit {
  KernelParams kparams;
  std::vector<std::vector<double>> draws;  // L_fd * draws rows, dim columns
  std::vector<double> rhat_per_param;
  std::vector<double> ess_per_param;
  long divergences = 0;
  double mean_accept = 0.0;
};

// Runs windowed adaptation on the full-data sentinel fold, freezes the
// kernel, then samples the draw bank. Chains start from prior draws.
// Throws adaptation_failure (with last positions) if every chain diverges
// persistently, and invalid_input for a zero-dimensional model.
FullDataFit adapt_full_data(const Model& model, const AdaptConfig& cfg,
                            std::uint64_t seed, int model_id);

}  // namespace pcv
