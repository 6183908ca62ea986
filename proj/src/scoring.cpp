#include "pcv/scoring.hpp"

#include <cmath>

#include "pcv/errors.hpp"
#include "pcv/math.hpp"

namespace pcv {

FoldScore logs_fold_score(std::span<const ScoreAccum> chains, long n) {
  const int l = static_cast<int>(chains.size());
  if (l < 1 || n < 1) throw invalid_input("logs_fold_score needs chains and draws");
  FoldScore fs;
  const double ln = static_cast<double>(l) * static_cast<double>(n);

  std::vector<double> ux(l);
  for (int c = 0; c < l; ++c) {
    ux[c] = chains[c].raw.u_x;
    fs.fault = fs.fault || chains[c].faults > 0;
    fs.batches += chains[c].batch.committed;
  }
  const double lf = logsumexp(ux) - std::log(ln);
  fs.estimate = lf;
  fs.log_f_hat = lf;

  if (lf == kNegInf) {
    // Every draw had zero predictive density.
    fs.fault = true;
    fs.mc_contribution = std::numeric_limits<double>::infinity();
    fs.naive_contribution = std::numeric_limits<double>::infinity();
    fs.ess = std::numeric_limits<double>::quiet_NaN();
    return fs;
  }

  // Naive sample variance of the density draws, in units of fhat^2.
  double sum_u2 = 0.0;
  for (int c = 0; c < l; ++c) sum_u2 += std::exp(chains[c].raw.u_x2 - 2.0 * lf);
  fs.naive_contribution = ln > 1 ? (sum_u2 - ln) / (ln - 1.0) : 0.0;
  if (fs.naive_contribution < 0.0) fs.naive_contribution = 0.0;

  // Batch-means limiting variance of the density draws, same units.
  const long a = chains[0].batch.committed;
  const long la = fs.batches;
  const int b = chains[0].batch.b;
  if (la >= 2 && a >= 1) {
    double ss = 0.0;
    for (int c = 0; c < l; ++c) {
      const double s2 = std::exp(chains[c].batch.v_x2 - 2.0 * lf);
      const double s1 = std::exp(chains[c].batch.v_x - lf);
      ss += s2 - 2.0 * s1 + static_cast<double>(chains[c].batch.committed);
    }
    fs.mc_contribution = b * ss / (la - 1.0);
    if (fs.mc_contribution < 0.0) fs.mc_contribution = 0.0;
    fs.ess = fs.mc_contribution > 0.0
                 ? ln * fs.naive_contribution / fs.mc_contribution
                 : std::numeric_limits<double>::quiet_NaN();
  } else {
    fs.mc_contribution = std::numeric_limits<double>::quiet_NaN();
    fs.ess = std::numeric_limits<double>::quiet_NaN();
  }
  return fs;
}

double hs_fold_score(const WelfordDiag& merged) {
  const int d = merged.dim();
  if (d % 2 != 0) throw invalid_input("HS accumulator must hold 2m components");
  const int m = d / 2;
  const auto mu = merged.mean();
  double score = 0.0;
  for (int i = 0; i < m; ++i)
    score += 2.0 * mu[i] - mu[m + i] * mu[m + i];
  return score;
}

DssResult dss_fold_score(const WelfordAccumulator& merged,
                         std::span<const double> y_test) {
  const int d = merged.dim();
  if (static_cast<int>(y_test.size()) != d)
    throw invalid_input("DSS test vector has wrong dimension");
  if (merged.count() < d + 1)
    throw invalid_input("DSS needs at least dim(test)+1 predictive draws");
  const auto mu = merged.mean();
  auto cov = merged.covariance();

  DssResult out;
  auto factor = cov;
  if (!cholesky_in_place(factor, d)) {
    double tr = 0.0;
    for (int i = 0; i < d; ++i) tr += cov[i * d + i];
    const double ridge = 1e-8 * tr / d;
    for (int i = 0; i < d; ++i) cov[i * d + i] += ridge;
    factor = cov;
    out.ridged = true;
    if (!cholesky_in_place(factor, d))
      throw numeric_fault("DSS predictive covariance is singular");
  }
  std::vector<double> r(d);
  for (int i = 0; i < d; ++i) r[i] = y_test[i] - mu[i];
  forward_solve(factor, d, r);
  double quad = 0.0;
  for (int i = 0; i < d; ++i) quad += r[i] * r[i];
  out.score = -chol_logdet(factor, d) - quad;
  return out;
}

double batch_means_variance(
    const std::vector<std::vector<double>>& per_chain_batch_means, int b) {
  long la = 0;
  double grand = 0.0;
  for (const auto& ch : per_chain_batch_means) {
    la += static_cast<long>(ch.size());
    for (double v : ch) grand += v;
  }
  if (la < 2)
    throw undefined_diagnostic("batch-means variance needs at least 2 batches");
  grand /= la;
  double ss = 0.0;
  for (const auto& ch : per_chain_batch_means)
    for (double v : ch) ss += (v - grand) * (v - grand);
  return b * ss / (la - 1.0);
}

double delta_method_mcse(std::span<const FoldScore> model_a,
                         std::span<const FoldScore> model_b, long chains,
                         long n) {
  double var = 0.0;
  auto fold_in = [&](std::span<const FoldScore> scores) {
    for (const auto& fs : scores) {
      if (!std::isfinite(fs.mc_contribution))
        var = std::numeric_limits<double>::infinity();
      else
        var += fs.mc_contribution;
    }
  };
  fold_in(model_a);
  fold_in(model_b);
  const double ln = static_cast<double>(chains) * static_cast<double>(n);
  return std::sqrt(var / ln);
}

SelectionResult selection_probability(double delta_hat,
                                      std::span<const double> fold_deltas) {
  const long k = static_cast<long>(fold_deltas.size());
  if (k < 2)
    throw invalid_input("selection probability needs at least 2 folds");
  const double mean = delta_hat / k;
  double ss = 0.0;
  for (double dk : fold_deltas) ss += (dk - mean) * (dk - mean);
  SelectionResult out;
  out.sigma2_delta = ss / (k - 1.0);
  const double denom = std::sqrt(k * out.sigma2_delta);
  if (denom == 0.0) {
    out.prob = delta_hat > 0.0 ? 1.0 : (delta_hat < 0.0 ? 0.0 : 0.5);
    return out;
  }
  out.prob = normal_cdf(delta_hat / denom);
  return out;
}

double fold_ess(std::span<const ScoreAccum> chains, long n) {
  const FoldScore fs = logs_fold_score(chains, n);
  if (!(fs.naive_contribution > 0.0) || !(fs.mc_contribution > 0.0))
    throw undefined_diagnostic("effective sample size undefined: zero variance");
  return fs.ess;
}

}  // namespace pcv
