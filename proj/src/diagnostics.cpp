#include "pcv/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "pcv/errors.hpp"
#include "pcv/rng.hpp"

namespace pcv {

std::optional<RhatStats> rhat_from_sums(std::span<const double> sum_x,
                                        std::span<const double> sum_x2,
                                        long n) {
  const int l = static_cast<int>(sum_x.size());
  if (l < 2 || n < 2) return std::nullopt;
  double w = 0.0, grand = 0.0;
  for (int c = 0; c < l; ++c) {
    w += (sum_x2[c] - sum_x[c] * sum_x[c] / n) / (n - 1.0) / l;
    grand += sum_x[c] / n / l;
  }
  double b = 0.0;
  for (int c = 0; c < l; ++c) {
    const double dev = sum_x[c] / n - grand;
    b += dev * dev;
  }
  b *= static_cast<double>(n) / (l - 1.0);
  if (!std::isfinite(w) || !std::isfinite(b) || !(w > 0.0)) return std::nullopt;
  RhatStats s;
  s.w = w;
  s.b = b;
  s.rhat = std::sqrt(((n - 1.0) / n * w + b / n) / w);
  return s;
}

std::optional<RhatStats> rhat_from_blocks(std::span<const ScoreAccum> chains,
                                          long n) {
  const int l = static_cast<int>(chains.size());
  std::vector<double> sx(l), sxx(l);
  for (int c = 0; c < l; ++c) {
    sx[c] = chains[c].shuffle.sum_x();
    sxx[c] = chains[c].shuffle.sum_x2();
  }
  return rhat_from_sums(sx, sxx, n);
}

double rhat_max(std::span<const double> per_fold_rhats, int* excluded) {
  double best = -1.0;
  int skipped = 0;
  for (double r : per_fold_rhats) {
    if (std::isfinite(r))
      best = std::max(best, r);
    else
      ++skipped;
  }
  if (excluded) *excluded = skipped;
  if (best < 0.0)
    throw undefined_diagnostic("Rhat undefined for every fold");
  return best;
}

FoldBlockSums gather_block_sums(std::span<const ScoreAccum> chains, long n) {
  FoldBlockSums out;
  out.chains = static_cast<int>(chains.size());
  out.blocks = chains.empty() ? 0 : chains[0].shuffle.blocks;
  out.n = n;
  out.y_x.reserve(static_cast<size_t>(out.chains) * out.blocks);
  out.y_x2.reserve(static_cast<size_t>(out.chains) * out.blocks);
  for (const auto& a : chains) {
    out.y_x.insert(out.y_x.end(), a.shuffle.y_x.begin(), a.shuffle.y_x.end());
    out.y_x2.insert(out.y_x2.end(), a.shuffle.y_x2.begin(),
                    a.shuffle.y_x2.end());
  }
  return out;
}

BenchmarkDraws shuffle_benchmark(std::span<const FoldBlockSums> folds, int r,
                                 std::uint64_t seed) {
  if (r < 1) throw invalid_input("benchmark needs at least one replicate");
  BenchmarkDraws out;
  out.replicates = r;
  out.values.reserve(r);
  for (int rep = 0; rep < r; ++rep) {
    CounterRng rng(seed, stream_key(StreamKind::Benchmark,
                                    static_cast<std::uint64_t>(rep)));
    double best = -1.0;
    for (const auto& fold : folds) {
      const int l = fold.chains, d = fold.blocks;
      std::vector<double> sx(l, 0.0), sxx(l, 0.0);
      for (int c = 0; c < l; ++c)
        for (int blk = 0; blk < d; ++blk) {
          const int src = static_cast<int>(rng.below(l));
          sx[c] += fold.y_x[src * d + blk];
          sxx[c] += fold.y_x2[src * d + blk];
        }
      const auto stats = rhat_from_sums(sx, sxx, fold.n);
      if (stats) best = std::max(best, stats->rhat);
    }
    if (best >= 0.0) out.values.push_back(best);
  }
  return out;
}

Verdict benchmark_verdict(double observed_rhat_max,
                          const BenchmarkDraws& draws, double quantile) {
  if (draws.values.empty())
    throw invalid_input("benchmark verdict needs non-empty draws");
  std::vector<double> sorted = draws.values;
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank empirical quantile.
  const long n = static_cast<long>(sorted.size());
  long rank = static_cast<long>(std::ceil(quantile * n));
  rank = std::clamp<long>(rank, 1, n);
  Verdict v;
  v.quantile = quantile;
  v.quantile_value = sorted[rank - 1];
  v.observed = observed_rhat_max;
  v.pass = observed_rhat_max <= v.quantile_value;
  return v;
}

}  // namespace pcv
