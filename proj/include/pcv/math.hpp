#pragma once

// Small numeric kernel shared by the accumulators, scores, and models:
// stable log-sum-exp, Gaussian densities, and dense/structured Cholesky
// helpers for the multivariate predictives.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace pcv {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

inline double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

inline double logsumexp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v)
    if (x > m) m = x;
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Standard normal CDF.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.70710678118654752440084436210485);
}

inline double normal_logpdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

// In-place lower Cholesky of a row-major n x n matrix.
// Returns false if a pivot is not strictly positive.
inline bool cholesky_in_place(std::vector<double>& a, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
  }
  return true;
}

// Given the Cholesky factor L (lower, row-major), solve L z = r in place.
inline void forward_solve(const std::vector<double>& l, int n,
                          std::vector<double>& r) {
  for (int i = 0; i < n; ++i) {
    double s = r[i];
    for (int k = 0; k < i; ++k) s -= l[i * n + k] * r[k];
    r[i] = s / l[i * n + i];
  }
}

inline double chol_logdet(const std::vector<double>& l, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::log(l[i * n + i]);
  return 2.0 * s;
}

// Log density of N(mean, cov) at x via a dense Cholesky.
// cov is consumed (factored in place). Returns -inf if cov is not PD.
inline double mvn_logpdf_chol(std::span<const double> x,
                              std::span<const double> mean,
                              std::vector<double>& cov, int n) {
  if (!cholesky_in_place(cov, n)) return kNegInf;
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = x[i] - mean[i];
  forward_solve(cov, n, r);
  double q = 0.0;
  for (int i = 0; i < n; ++i) q += r[i] * r[i];
  return -0.5 * (n * kLog2Pi + chol_logdet(cov, n) + q);
}

// Log density of N(mean, sigma2 I + tau2 J) at x, J the all-ones matrix.
// Sherman-Morrison gives the quadratic form and determinant in O(n).
inline double mvn_logpdf_compound(std::span<const double> x,
                                  std::span<const double> mean, double sigma2,
                                  double tau2) {
  const int n = static_cast<int>(x.size());
  if (!(sigma2 > 0.0) || tau2 < 0.0) return kNegInf;
  double ss = 0.0, sr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = x[i] - mean[i];
    ss += r * r;
    sr += r;
  }
  const double denom = sigma2 + n * tau2;
  const double quad = (ss - tau2 * sr * sr / denom) / sigma2;
  const double logdet = (n - 1) * std::log(sigma2) + std::log(denom);
  return -0.5 * (n * kLog2Pi + logdet + quad);
}

}  // namespace pcv
