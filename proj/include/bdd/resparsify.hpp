#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bdd/block_matrix.hpp"

namespace bdd {

// Applies an operator approximating the inverse of the matrix it was built
// for, to constant accuracy (within a factor e in the exponential metric).
using SolverApply = std::function<BlockVector(const BlockVector&)>;
// Builds such an operator for a given positive definite bDD matrix.
using InnerSolverFactory = std::function<SolverApply(const BlockSparseMatrix&)>;

struct LeverageEstimates {
  std::vector<double> tau;  // one nonnegative score per block column of B
  int jl_rows = 0;
  uint64_t seed = 0;
};

// Sketched estimates of tr(B_[i]^* (X + C C^*)^{-1} B_[i]) for every block
// column of b, where w applies an approximate inverse of X + C C^*. Uses the
// split
//   tau_[i],j = |C^* Q b_[i],j|^2 + |sqrt(X) Q b_[i],j|^2,  Q = (X + C C^*)^{-1}
// sketched by Gaussian projections with jl_rows rows, so only 2 jl_rows
// applications of w are needed. Estimates are within a factor 2 of the true
// traces with high probability at jl_rows = ceil(24 ln n). Deterministic
// given the seed. An empty c reduces the estimate to tr(B_[i]^* X^{-1} B_[i])
// (with w = X^{-1}).
LeverageEstimates estimate_block_leverage(const UnitaryTransferMatrix& b,
                                          const BlockDiagonalMatrix& x,
                                          const UnitaryTransferMatrix& c,
                                          const SolverApply& w, int jl_rows,
                                          uint64_t seed);

// Independent Bernoulli sampling of block columns with probability
// p = min(1, c_s tau ln(n) / epsilon^2); kept columns are rescaled by
// 1/sqrt(p) so the expectation of B~ B~^* is exactly B B^*. One PRNG stream
// per block column, so the decision for a column does not depend on the
// others' order.
UnitaryTransferMatrix sample_by_scores(const UnitaryTransferMatrix& b,
                                       const std::vector<double>& tau, double epsilon,
                                       uint64_t seed, double c_s = 9.0);

// Density reduction by undersampled leverage scores: factor m = X + B B^*,
// uniformly sample m/k block columns of B into C, build a solver for
// X + C C^* through the factory, estimate leverage upper bounds against it,
// and resample B accordingly. Returns X + B~ B~^* with O(k n log n / eps^2)
// blocks approximating m within epsilon. Requires the diagonal slack X to be
// positive definite (pad first if needed). k >= m skips the inner solve
// (C empty, the slack inverse is exact). epsilon in (0, 1].
BlockSparseMatrix sparsify(const BlockSparseMatrix& m, double epsilon, int k,
                           const InnerSolverFactory& factory, uint64_t seed,
                           double c_s = 9.0);

}  // namespace bdd
