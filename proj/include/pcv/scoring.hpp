#pragma once

// Scoring-rule functionals over merged accumulators, the delta-method Monte
// Carlo variance for LogS, and the epistemic normal approximation. All
// functions are pure and safe for concurrent read-only use.

#include <span>
#include <vector>

#include "pcv/accum.hpp"

namespace pcv {

struct FoldScore {
  int fold = -1;
  double estimate = 0.0;            // positively oriented fold score
  double log_f_hat = 0.0;           // LogS: log mean predictive density
  double mc_contribution = 0.0;     // sigma^2_fhat / fhat^2 (LogS only)
  double naive_contribution = 0.0;  // s^2_fhat / fhat^2 (LogS only)
  double ess = 0.0;                 // per-fold effective sample size
  long batches = 0;                 // committed batches summed over chains
  bool fault = false;
};

// LogS fold score from one fold's per-chain accumulators. n is the number
// of sampling draws per chain (equal across chains).
FoldScore logs_fold_score(std::span<const ScoreAccum> chains, long n);

// Classic Hyvarinen score of one fold: sum over test observations of
// 2 E[d2 + d1^2] - (E[d1])^2, expectations over posterior draws. Smaller is
// better; callers comparing models positively oriented should negate.
// The accumulator holds [xi1 per obs, xi2 per obs] (dimension 2m).
double hs_fold_score(const WelfordDiag& merged);

struct DssResult {
  double score = 0.0;
  bool ridged = false;
};

// Dawid-Sebastini score: -log|Sigma| - (y - mu)^T Sigma^{-1} (y - mu) with
// mu, Sigma the Welford mean/covariance of the predictive draws. A singular
// Sigma gets one ridge of 1e-8 * trace/d; if still singular the fold errors.
DssResult dss_fold_score(const WelfordAccumulator& merged,
                         std::span<const double> y_test);

// Plain-batch-means limiting variance (Jones et al. style):
// sigma^2 = b/(L a - 1) * sum over chains and batches of (bmean - grand)^2.
double batch_means_variance(
    const std::vector<std::vector<double>>& per_chain_batch_means, int b);

// Delta-method MC variance combined over one or two models' folds;
// MCSE = sqrt(sum of contributions / (L N)). Folds with zero mean predictive
// density make the MCSE +inf.
double delta_method_mcse(std::span<const FoldScore> model_a,
                         std::span<const FoldScore> model_b, long chains,
                         long n);

struct SelectionResult {
  double prob = 0.5;          // Pr(M_A beats M_B | y)
  double sigma2_delta = 0.0;  // sample variance of the fold contributions
};

// Normal approximation Phi(delta / sqrt(K sigma^2)). Requires K >= 2.
// Zero variance falls back to the sign of delta (0.5 when both are zero).
SelectionResult selection_probability(double delta_hat,
                                      std::span<const double> fold_deltas);

// Per-fold effective sample size; throws undefined_diagnostic when the
// sample variance or batch-means variance is zero.
double fold_ess(std::span<const ScoreAccum> chains, long n);

}  // namespace pcv
