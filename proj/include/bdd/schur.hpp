#pragma once

#include <cstdint>
#include <vector>

#include "bdd/block_matrix.hpp"

namespace bdd {

// Driver parameters for iterated squaring. Each squaring round turns an
// alpha-bDD leading corner into an (alpha^2/2)-bDD one, so d_iters rounds
// reach the (4/epsilon) dominance the terminal step wants.
struct SchurParams {
  double alpha = 4.0;
  double epsilon = 0.25;
  int d_iters = 1;
};

// d_iters = ceil(2 log2(log(4/epsilon) / log(alpha/2))), clamped to >= 1.
// alpha must be at least 4, epsilon in (0, 1/2).
SchurParams make_schur_params(double alpha, double epsilon);

// One squaring round. Returns a bDD matrix on the full index set whose Schur
// complement onto the complement of f matches the input's within epsilon in
// the exponential metric, and whose [f,f] corner is (alpha^2/2)-bDD when the
// input corner was alpha-bDD. Requires is_bdd(m) and a 4-bDD [f,f] corner.
// Entries supported entirely on the complement pass through additively: they
// are copied verbatim and never touched by the sparsifiers.
//
// When every per-column demand clique fits the exact product regime the
// whole round is deterministic and preserves the Schur complement exactly.
BlockSparseMatrix schur_square(const BlockSparseMatrix& m, const std::vector<int>& f,
                               double epsilon, uint64_t seed);

// Terminal elimination for a strongly dominant corner. Splits each f diagonal
// as M_jj = X_jj + D_jj with X = alpha/(alpha+1) M_jj and replaces the corner
// inverse by the two-term polynomial
//   Z = X^{-1}/2 + X^{-1} (X - D + A) X^{-1} (X - D + A) X^{-1} / 2
// (A is the negated [f,f] off-diagonal part), which costs a Loewner factor
// 1 + 2/alpha. The smoothed matrix has a block diagonal corner and is
// eliminated through demand cliques at epsilon/2 each, so the returned matrix
// approximates the true Schur complement within epsilon + 2/alpha. Output is
// |c| x |c| over the complement c of f in ascending order. Requires is_bdd(m)
// and an alpha-bDD [f,f] corner with alpha >= 4.
BlockSparseMatrix last_step(const BlockSparseMatrix& m, const std::vector<int>& f,
                            double alpha, double epsilon, uint64_t seed);

// Full pipeline: d_iters squaring rounds at epsilon/(2 d_iters) each, then
// last_step at dominance 4/epsilon and budget epsilon/4. When the corner is
// already (4/epsilon)-bDD the squaring rounds are skipped. The result
// approximates the Schur complement of m onto the complement of f within
// epsilon. Output indexing matches last_step.
BlockSparseMatrix approx_schur(const BlockSparseMatrix& m, const std::vector<int>& f,
                               double alpha, double epsilon, uint64_t seed);

}  // namespace bdd
