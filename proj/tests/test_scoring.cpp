#include <array>
#include <cmath>

#include "doctest.h"
#include "pcv/errors.hpp"
#include "pcv/math.hpp"
#include "pcv/scoring.hpp"
#include "test_support.hpp"

using namespace pcv;

TEST_CASE("logs fold score closed cases") {
  // Constant predictive density c: score log c.
  const double logc = std::log(0.37);
  auto acc = oracle::feed({std::vector<double>(100, logc),
                           std::vector<double>(100, logc)},
                          10, 5, logc);
  const auto fs = logs_fold_score(acc, 100);
  CHECK(fs.estimate == doctest::Approx(logc).epsilon(1e-12));
  CHECK(fs.mc_contribution == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // Draws {0.5, 1.5}: arithmetic mean 1, log score 0.
  auto acc2 = oracle::feed({{std::log(0.5), std::log(1.5)}}, 1, 1, 0.0);
  CHECK(logs_fold_score(acc2, 2).estimate ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

  // Stored-draw oracle on a realistic stream.
  CounterRng rng(2, 3);
  oracle::Chains chains(4);
  for (auto& ch : chains)
    for (int i = 0; i < 900; ++i) ch.push_back(-2.0 + 0.8 * rng.normal());
  const auto ref = oracle::two_pass(chains, 50);
  const auto fs3 = logs_fold_score(oracle::feed(chains, 50, 5, -2.0), 900);
  CHECK(oracle::rel_err(fs3.estimate, ref.score) < 1e-10);

  // All draws at zero density: -inf score with a fault flag.
  auto dead = oracle::feed({std::vector<double>(20, kNegInf)}, 5, 2, 0.0);
  const auto fs4 = logs_fold_score(dead, 20);
  CHECK(fs4.estimate == kNegInf);
  CHECK(fs4.fault);
  CHECK(std::isinf(fs4.mc_contribution));
}

TEST_CASE("hyvarinen score closed forms") {
  // Degenerate posterior, Gaussian predictive N(mu, s2), one observation y:
  // xi1 = d2 + d1^2, xi2 = d1 with d1 = -(y-mu)/s2, d2 = -1/s2.
  auto hs_of = [](double y, double mu, double s2) {
    WelfordDiag acc(2);
    const double d1 = -(y - mu) / s2;
    const double d2 = -1.0 / s2;
    for (int i = 0; i < 50; ++i) {
      const double xi[2] = {d2 + d1 * d1, d1};
      acc.add(xi);
    }
    return hs_fold_score(acc);
  };
  CHECK(hs_of(1.0, 1.0, 1.0) == doctest::Approx(-2.0).epsilon(1e-12));
  const double y = 2.3, mu = 0.7, s2 = 1.9;
  CHECK(hs_of(y, mu, s2) ==
        doctest::Approx(-2.0 / s2 + (y - mu) * (y - mu) / (s2 * s2))
            .epsilon(1e-12));
}

TEST_CASE("hyvarinen online equals two-pass") {
  CounterRng rng(5, 8);
  const int m = 3;  // test observations
  std::vector<std::array<double, 6>> draws;  // [xi1 x3, xi2 x3]
  WelfordDiag acc(2 * m);
  for (int s = 0; s < 4000; ++s) {
    std::array<double, 6> xi{};
    for (int o = 0; o < m; ++o) {
      const double mu = 0.5 * rng.normal();
      const double s2 = 0.5 + rng.uniform();
      const double yv = 1.0 + 0.1 * o;
      const double d1 = -(yv - mu) / s2;
      xi[o] = -1.0 / s2 + d1 * d1;
      xi[m + o] = d1;
    }
    draws.push_back(xi);
    acc.add(xi);
  }
  double score = 0.0;
  for (int o = 0; o < m; ++o) {
    long double m1 = 0.0L, m2 = 0.0L;
    for (const auto& xi : draws) {
      m1 += xi[o];
      m2 += xi[m + o];
    }
    m1 /= draws.size();
    m2 /= draws.size();
    score += 2.0 * static_cast<double>(m1) -
             static_cast<double>(m2) * static_cast<double>(m2);
  }
  CHECK(oracle::rel_err(hs_fold_score(acc), score) < 1e-10);
}

TEST_CASE("dss univariate closed form") {
  CounterRng rng(6, 9);
  WelfordAccumulator acc(1, {2.0});
  long double sum = 0.0L, ss = 0.0L;
  std::vector<double> draws;
  for (int i = 0; i < 5000; ++i) {
    const double v = 2.0 + 0.7 * rng.normal();
    draws.push_back(v);
    const double x[1] = {v};
    acc.add(x);
    sum += v;
  }
  const double mean = static_cast<double>(sum / draws.size());
  for (double v : draws) ss += (v - mean) * (v - mean);
  const double s2 = static_cast<double>(ss / (draws.size() - 1));
  const double y = 2.5;
  const double expect = -std::log(s2) - (y - mean) * (y - mean) / s2;
  const double yv[1] = {y};
  CHECK(oracle::rel_err(dss_fold_score(acc, yv).score, expect) < 1e-10);

  // y at the predictive mean leaves only the log-determinant.
  const double ym[1] = {mean};
  CHECK(dss_fold_score(acc, ym).score ==
        doctest::Approx(-std::log(s2)).epsilon(1e-12));
}

TEST_CASE("dss 2-d against a stored-draw solve") {
  CounterRng rng(7, 10);
  WelfordAccumulator acc(2);
  std::vector<std::array<double, 2>> draws;
  for (int i = 0; i < 4000; ++i) {
    const double a = rng.normal();
    const double b = 0.6 * a + 0.8 * rng.normal() + 1.0;
    const std::array<double, 2> x{a, b};
    draws.push_back(x);
    acc.add(x);
  }
  double m0 = 0, m1 = 0;
  for (const auto& x : draws) {
    m0 += x[0];
    m1 += x[1];
  }
  m0 /= draws.size();
  m1 /= draws.size();
  double c00 = 0, c01 = 0, c11 = 0;
  for (const auto& x : draws) {
    c00 += (x[0] - m0) * (x[0] - m0);
    c01 += (x[0] - m0) * (x[1] - m1);
    c11 += (x[1] - m1) * (x[1] - m1);
  }
  const double n1 = draws.size() - 1.0;
  c00 /= n1;
  c01 /= n1;
  c11 /= n1;
  const double y0 = 0.4, y1 = 1.7;
  const double det = c00 * c11 - c01 * c01;
  const double r0 = y0 - m0, r1 = y1 - m1;
  const double quad = (c11 * r0 * r0 - 2 * c01 * r0 * r1 + c00 * r1 * r1) / det;
  const double expect = -std::log(det) - quad;
  const double y[2] = {y0, y1};
  CHECK(oracle::rel_err(dss_fold_score(acc, y).score, expect) < 1e-8);
}

TEST_CASE("dss ridges a singular covariance once") {
  WelfordAccumulator acc(2);
  CounterRng rng(8, 11);
  for (int i = 0; i < 100; ++i) {
    const double x[2] = {rng.normal(), 3.0};  // constant coordinate
    acc.add(x);
  }
  const double y[2] = {0.1, 0.2};
  const auto res = dss_fold_score(acc, y);
  CHECK(res.ridged);
  CHECK(std::isfinite(res.score));
}

TEST_CASE("delta-method mcse") {
  // Constant draws: zero up to log-space accumulation rounding.
  auto constant = oracle::feed({std::vector<double>(100, -1.0)}, 10, 5, -1.0);
  FoldScore fs = logs_fold_score(constant, 100);
  CHECK(delta_method_mcse({&fs, 1}, {}, 1, 100) < 1e-7);

  // Direct substitution: sigma2_f = 4, f_hat = 2, LN = 400 -> MCSE 0.05.
  FoldScore manual;
  manual.mc_contribution = 4.0 / (2.0 * 2.0);
  CHECK(delta_method_mcse({&manual, 1}, {}, 4, 100) ==
        doctest::Approx(0.05).epsilon(1e-12));

  // MCSE shrinks like 1/sqrt(N) when N quadruples.
  CounterRng rng(9, 12);
  auto run = [&](long n) {
    oracle::Chains chains(4);
    for (auto& ch : chains)
      for (long i = 0; i < n; ++i) ch.push_back(-1.0 + 0.5 * rng.normal());
    const auto acc = oracle::feed(chains, 50, 5, -1.0);
    FoldScore f = logs_fold_score(acc, n);
    return delta_method_mcse({&f, 1}, {}, 4, n);
  };
  const double m1 = run(2000);
  const double m4 = run(8000);
  CHECK(m4 / m1 > 0.4);
  CHECK(m4 / m1 < 0.6);
}

TEST_CASE("selection probability") {
  std::vector<double> deltas{0.5, -0.5, 0.25, -0.25};
  CHECK(selection_probability(0.0, deltas).prob == doctest::Approx(0.5));

  // Fold deltas whose z-statistic is exactly 2.
  std::vector<double> base{1.0, -1.0, 1.0, -1.0};  // sample variance 4/3
  const double k = 4.0, sigma2 = 4.0 / 3.0;
  const double target_delta = 2.0 * std::sqrt(k * sigma2);
  std::vector<double> shifted;
  for (double b : base) shifted.push_back(b + target_delta / k);
  const auto res = selection_probability(target_delta, shifted);
  CHECK(std::fabs(res.prob - 0.9772498680518208) < 1e-5);

  // Degenerate variance falls back to the sign.
  std::vector<double> equal{1.0, 1.0};
  CHECK(selection_probability(2.0, equal).prob == 1.0);
  std::vector<double> equal_neg{-1.0, -1.0};
  CHECK(selection_probability(-2.0, equal_neg).prob == 0.0);
  std::vector<double> zeros{0.0, 0.0};
  CHECK(selection_probability(0.0, zeros).prob == 0.5);

  std::vector<double> one{1.0};
  CHECK_THROWS_AS(selection_probability(1.0, one), invalid_input);

  // Orientation: the sign of delta pins which side of 1/2 the probability is.
  CounterRng rng(10, 13);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> d;
    double sum = 0;
    for (int k2 = 0; k2 < 8; ++k2) {
      d.push_back(rng.normal());
      sum += d.back();
    }
    const double p = selection_probability(sum, d).prob;
    if (sum > 0) CHECK(p > 0.5);
    if (sum < 0) CHECK(p < 0.5);
  }
}

TEST_CASE("fold ess requires positive variance") {
  auto constant = oracle::feed({std::vector<double>(100, -1.0),
                                std::vector<double>(100, -1.0)},
                               10, 5, -1.0);
  CHECK_THROWS_AS(fold_ess(constant, 100), undefined_diagnostic);
}
