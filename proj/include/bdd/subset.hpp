#pragma once

// Randomized selection of large alpha-bDD index subsets.

#include <cstdint>
#include <vector>

#include "bdd/block_matrix.hpp"

namespace bdd {

struct SubsetResult {
  std::vector<int> f;  // sorted block indices
  int iterations = 0;
  uint64_t seed = 0;
};

// Samples a uniform candidate set F' of size ceil(n / (4(1+alpha))) and keeps
// the rows whose total off-diagonal mass dominates their mass inside F' by a
// (1+alpha) factor; resamples until |F| >= n / (8(1+alpha)). The kept set is
// alpha-bDD by construction, using the same cached block norms the predicate
// sees.
SubsetResult bdd_subset(const BlockSparseMatrix& m, double alpha, uint64_t seed);

// Drops rows with more than twice the average number of stored blocks (ties
// kept), then selects within the remaining principal submatrix. Guarantees
// |F| >= n / (16(1+alpha)) and a row degree bound on every member.
SubsetResult bdd_subset_low_degree(const BlockSparseMatrix& m, double alpha,
                                   uint64_t seed);

}  // namespace bdd
