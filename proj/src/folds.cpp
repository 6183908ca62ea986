#include "pcv/folds.hpp"

#include <algorithm>
#include <numeric>

#include "pcv/errors.hpp"
#include "pcv/rng.hpp"

namespace pcv {

std::vector<std::vector<int>> FoldAssignment::test_sets() const {
  std::vector<std::vector<int>> sets(K);
  for (size_t i = 0; i < test_index.size(); ++i)
    sets[test_index[i]].push_back(static_cast<int>(i));
  return sets;
}

long FoldAssignment::test_size(int fold) const {
  if (fold >= K) return 0;  // sentinel
  long n = 0;
  for (int t : test_index) n += (t == fold);
  return n;
}

void FoldAssignment::validate(long n_obs) const {
  if (K < 1) throw invalid_input("fold count must be at least 1");
  if (static_cast<long>(test_index.size()) != n_obs)
    throw invalid_input("test_index length does not match n_obs");
  std::vector<long> sizes(K, 0);
  for (int t : test_index) {
    if (t < 0 || t >= K) throw invalid_input("test_index out of range");
    ++sizes[t];
  }
  for (int k = 0; k < K; ++k) {
    if (sizes[k] == 0)
      throw invalid_input("fold " + std::to_string(k) + " has empty test set");
    if (sizes[k] == n_obs)
      throw invalid_input("fold " + std::to_string(k) +
                          " has empty training set");
  }
}

FoldAssignment make_loo_scheme(const Dataset& data) {
  const long n = data.n_obs();
  if (n < 2) throw invalid_input("LOO needs at least 2 observations");
  FoldAssignment f;
  f.K = static_cast<int>(n);
  f.test_index.resize(n);
  std::iota(f.test_index.begin(), f.test_index.end(), 0);
  f.validate(n);
  return f;
}

FoldAssignment make_logo_scheme(const Dataset& data) {
  if (!data.has_groups())
    throw invalid_input("LOGO requires a group column");
  data.validate();
  FoldAssignment f;
  f.K = data.n_groups();
  f.test_index = data.group_id;
  f.validate(data.n_obs());
  return f;
}

FoldAssignment make_kfold_scheme(const Dataset& data, int K,
                                 std::uint64_t seed) {
  const long n = data.n_obs();
  if (K < 2 || K > n)
    throw invalid_input("K-fold requires 2 <= K <= n_obs");
  // Fold sizes differ by at most one; the remainder goes to the lowest folds.
  std::vector<int> labels;
  labels.reserve(n);
  const long base = n / K, rem = n % K;
  for (int k = 0; k < K; ++k)
    for (long i = 0; i < base + (k < rem ? 1 : 0); ++i) labels.push_back(k);
  CounterRng rng(seed, stream_key(StreamKind::KFold, static_cast<std::uint64_t>(K)));
  for (long i = n - 1; i > 0; --i)
    std::swap(labels[i], labels[rng.below(i + 1)]);
  FoldAssignment f;
  f.K = K;
  f.test_index = std::move(labels);
  f.validate(n);
  return f;
}

FoldAssignment make_time_block_scheme(const Dataset& data, int K) {
  const long n = data.n_obs();
  if (!data.has_time())
    throw invalid_input("time-block scheme requires a time column");
  if (K < 2 || K > n)
    throw invalid_input("time-block scheme requires 2 <= K <= n_obs");
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
    return data.time_index[a] < data.time_index[b];
  });
  FoldAssignment f;
  f.K = K;
  f.test_index.assign(n, 0);
  const long base = n / K, rem = n % K;
  long pos = 0;
  for (int k = 0; k < K; ++k) {
    const long len = base + (k < rem ? 1 : 0);
    for (long i = 0; i < len; ++i) f.test_index[order[pos++]] = k;
  }
  f.validate(n);
  return f;
}

}  // namespace pcv
