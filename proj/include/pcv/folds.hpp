#pragma once

#include <cstdint>
#include <vector>

#include "pcv/dataset.hpp"

namespace pcv {

// Partition of the observation index set into K disjoint, non-empty test
// sets. test_index[i] gives the fold whose test set holds observation i.
// Fold id K is reserved as the full-data sentinel (empty test set).
struct FoldAssignment {
  int K = 0;
  std::vector<int> test_index;

  std::vector<std::vector<int>> test_sets() const;
  long test_size(int fold) const;
  void validate(long n_obs) const;
};

FoldAssignment make_loo_scheme(const Dataset& data);
FoldAssignment make_logo_scheme(const Dataset& data);
FoldAssignment make_kfold_scheme(const Dataset& data, int K,
                                 std::uint64_t seed);
// Contiguous blocks in time order (ties broken by row order).
FoldAssignment make_time_block_scheme(const Dataset& data, int K);

}  // namespace pcv
