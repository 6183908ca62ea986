#pragma once

// Convergence diagnostics over the score draws: per-fold Rhat (no splitting,
// no rank normalization), Rhat_max, and the block-shuffle benchmark that
// gives Rhat_max an empirical null distribution.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcv/accum.hpp"

namespace pcv {

struct RhatStats {
  double w = 0.0;  // within-chain variance
  double b = 0.0;  // between-chain variance
  double rhat = 0.0;
};

// Rhat from per-chain centered sums (sum_x) and sums of squares (sum_x2)
// over n draws per chain. Returns nullopt when W is zero or the sums are
// not finite (constant or degenerate chains).
std::optional<RhatStats> rhat_from_sums(std::span<const double> sum_x,
                                        std::span<const double> sum_x2,
                                        long n);

// Same, summing each chain's shuffle blocks first.
std::optional<RhatStats> rhat_from_blocks(std::span<const ScoreAccum> chains,
                                          long n);

// Maximum over folds and models; undefined folds are skipped. Throws
// undefined_diagnostic when every fold is undefined.
double rhat_max(std::span<const double> per_fold_rhats, int* excluded = nullptr);

// One fold's frozen block sums: y_x/y_x2 are L x D row-major views.
struct FoldBlockSums {
  int chains = 0;
  int blocks = 0;
  long n = 0;
  std::vector<double> y_x;
  std::vector<double> y_x2;
};

FoldBlockSums gather_block_sums(std::span<const ScoreAccum> chains, long n);

struct BenchmarkDraws {
  int replicates = 0;  // R
  std::vector<double> values;
};

// For each replicate, every (chain, block) slot is refilled from a chain
// drawn uniformly with replacement among that fold's own chains; Rhat is
// recomputed per fold from the recombined sums and the maximum over folds
// is one benchmark draw. Replicates use independent streams keyed by index.
BenchmarkDraws shuffle_benchmark(std::span<const FoldBlockSums> folds, int r,
                                 std::uint64_t seed);

struct Verdict {
  bool pass = true;
  double quantile = 0.99;
  double quantile_value = 0.0;
  double observed = 0.0;
};

// Advisory verdict: pass when observed <= the empirical quantile of the
// benchmark draws (closed inequality). The histogram stays authoritative.
Verdict benchmark_verdict(double observed_rhat_max,
                          const BenchmarkDraws& draws, double quantile = 0.99);

}  // namespace pcv
