#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pcv/diagnostics.hpp"
#include "pcv/errors.hpp"
#include "pcv/scoring.hpp"
#include "test_support.hpp"

using namespace pcv;

namespace {

std::vector<ScoreAccum> chains_from(const oracle::Chains& chains, int blocks,
                                    double center = 0.0, int batch = 10) {
  return oracle::feed(chains, batch, blocks, center);
}

}  // namespace

TEST_CASE("rhat hand-derived closed cases") {
  // Chains {1,2} and {3,4}: W = 1/2, B = 4, Rhat = sqrt(4.5).
  auto acc = chains_from({{1.0, 2.0}, {3.0, 4.0}}, 1);
  const auto stats = rhat_from_blocks(acc, 2);
  REQUIRE(stats.has_value());
  CHECK(std::fabs(stats->w - 0.5) < 1e-12);
  CHECK(std::fabs(stats->b - 4.0) < 1e-12);
  CHECK(std::fabs(stats->rhat - std::sqrt(4.5)) < 1e-12);

  // Identical non-constant chains: B = 0, Rhat = sqrt((N-1)/N).
  std::vector<double> ch{0.1, -0.4, 0.9, 1.3, -0.2};
  auto same = chains_from({ch, ch, ch}, 1);
  const auto s2 = rhat_from_blocks(same, 5);
  REQUIRE(s2.has_value());
  CHECK(std::fabs(s2->b) < 1e-12);
  CHECK(std::fabs(s2->rhat - std::sqrt(4.0 / 5.0)) < 1e-12);

  // Constant chains: W = 0, undefined.
  auto constant = chains_from({{2.0, 2.0}, {2.0, 2.0}}, 1, 2.0);
  CHECK_FALSE(rhat_from_blocks(constant, 2).has_value());
}

TEST_CASE("rhat matches a stored-draw two-pass computation") {
  CounterRng rng(3, 5);
  oracle::Chains chains(4);
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 750; ++i)
      chains[c].push_back(-1.5 + 0.05 * c + 0.9 * rng.normal());
  const auto ref = oracle::two_pass(chains, 50);
  const auto acc = chains_from(chains, 5, -1.5);
  const auto stats = rhat_from_blocks(acc, 750);
  REQUIRE(stats.has_value());
  CHECK(oracle::rel_err(stats->w, ref.w) < 1e-10);
  CHECK(oracle::rel_err(stats->b, ref.b) < 1e-10);
  CHECK(oracle::rel_err(stats->rhat, ref.rhat) < 1e-10);
}

TEST_CASE("rhat_max skips undefined folds") {
  std::vector<double> values{1.001, 1.02, 1.005};
  CHECK(rhat_max(values) == doctest::Approx(1.02));
  std::vector<double> single{1.003};
  CHECK(rhat_max(single) == doctest::Approx(1.003));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> with_nan{1.001, nan, 1.04};
  int excluded = 0;
  CHECK(rhat_max(with_nan, &excluded) == doctest::Approx(1.04));
  CHECK(excluded == 1);
  std::vector<double> all_nan{nan, nan};
  CHECK_THROWS_AS(rhat_max(all_nan), undefined_diagnostic);
}

TEST_CASE("shuffle benchmark of identical chains is degenerate") {
  std::vector<double> ch;
  CounterRng rng(4, 6);
  for (int i = 0; i < 200; ++i) ch.push_back(rng.normal());
  const auto acc = chains_from({ch, ch, ch, ch}, 5);
  std::vector<FoldBlockSums> folds{gather_block_sums(acc, 200)};
  const auto bench = shuffle_benchmark(folds, 50, 9);
  REQUIRE(bench.values.size() == 50);
  for (double v : bench.values)
    CHECK(v == doctest::Approx(std::sqrt(199.0 / 200.0)).epsilon(1e-12));
}

TEST_CASE("shifted chain sits above the whole benchmark") {
  CounterRng rng(5, 7);
  oracle::Chains chains(4);
  for (auto& c : chains)
    for (int i = 0; i < 1000; ++i) c.push_back(rng.normal());
  for (auto& v : chains[2]) v += 5.0;  // one corrupted chain
  const auto acc = chains_from(chains, 5);
  const auto observed = rhat_from_blocks(acc, 1000);
  REQUIRE(observed.has_value());
  std::vector<FoldBlockSums> folds{gather_block_sums(acc, 1000)};
  const auto bench = shuffle_benchmark(folds, 100, 10);
  const double worst = *std::max_element(bench.values.begin(), bench.values.end());
  CHECK(observed->rhat > worst);
}

TEST_CASE("benchmark verdict boundary rules") {
  BenchmarkDraws draws;
  draws.replicates = 100;
  for (int i = 1; i <= 100; ++i) draws.values.push_back(1.0 + i * 0.001);
  // Nearest-rank 0.99 quantile of 100 draws is the 99th smallest: 1.099.
  auto v = benchmark_verdict(1.05, draws, 0.99);
  CHECK(v.pass);
  CHECK(v.quantile_value == doctest::Approx(1.099));
  CHECK(benchmark_verdict(0.5, draws, 0.99).pass);       // below the minimum
  CHECK_FALSE(benchmark_verdict(1.2, draws, 0.99).pass); // above the maximum
  CHECK(benchmark_verdict(1.099, draws, 0.99).pass);     // closed inequality
}

TEST_CASE("ess calibration on iid and AR(1) streams") {
  CounterRng rng(6, 8);
  const int l = 4;
  const long n = 10000;

  oracle::Chains iid(l);
  for (auto& ch : iid)
    for (long i = 0; i < n; ++i) ch.push_back(std::log(100.0 + rng.normal()));
  const auto acc = oracle::feed(iid, 100, 5, std::log(100.0));
  const double ess_iid = fold_ess(acc, n);
  CHECK(ess_iid / (l * n) > 0.7);
  CHECK(ess_iid / (l * n) < 1.3);

  oracle::Chains ar(l);
  for (auto& ch : ar) {
    const auto x = oracle::ar1(n, 0.9, 100.0, rng);
    for (double v : x) ch.push_back(std::log(v));
  }
  const auto acc_ar = oracle::feed(ar, 100, 5, std::log(100.0));
  const double ess_ar = fold_ess(acc_ar, n);
  const double ratio = ess_ar / (l * n);
  CHECK(ratio == doctest::Approx(0.0526).epsilon(0.5));
}

TEST_CASE("overall ess falls inside the per-fold range") {
  CounterRng rng(7, 9);
  const long n = 4000;
  double naive_sum = 0, mc_sum = 0;
  std::vector<double> per_fold;
  for (int k = 0; k < 6; ++k) {
    const double rho = 0.1 + 0.12 * k;
    oracle::Chains chains(4);
    for (auto& ch : chains) {
      const auto x = oracle::ar1(n, rho, 50.0, rng);
      for (double v : x) ch.push_back(std::log(v));
    }
    const auto acc = oracle::feed(chains, 50, 5, std::log(50.0));
    const auto fs = logs_fold_score(acc, n);
    per_fold.push_back(fs.ess);
    naive_sum += fs.naive_contribution;
    mc_sum += fs.mc_contribution;
  }
  const double overall = 4.0 * n * naive_sum / mc_sum;
  CHECK(overall >= *std::min_element(per_fold.begin(), per_fold.end()));
  CHECK(overall <= *std::max_element(per_fold.begin(), per_fold.end()));
}

TEST_CASE("rhat trends toward one as chains lengthen") {
  // Well-mixed AR chains: the fraction of folds below 1.01 should be
  // non-decreasing in N on average over seeds.
  const int folds = 10, l = 4;
  std::vector<long> lengths{100, 500, 2000};
  std::vector<double> fraction(lengths.size(), 0.0);
  for (int seed = 0; seed < 10; ++seed) {
    for (size_t li = 0; li < lengths.size(); ++li) {
      int ok = 0;
      for (int k = 0; k < folds; ++k) {
        CounterRng rng(100 + seed, 17 * k + li);
        oracle::Chains chains(l);
        for (auto& ch : chains) ch = oracle::ar1(lengths[li], 0.3, 0.0, rng);
        const auto acc = chains_from(chains, 5);
        const auto stats = rhat_from_blocks(acc, lengths[li]);
        if (stats && stats->rhat < 1.01) ++ok;
      }
      fraction[li] += ok / double(folds) / 10.0;
    }
  }
  CHECK(fraction[1] >= fraction[0]);
  CHECK(fraction[2] >= fraction[1]);
}
