#pragma once

// Jacobi splitting M_FF = X + L and the truncated Neumann-series operator
// used as the inner solver of the elimination chain.

#include <vector>

#include "bdd/block_matrix.hpp"

namespace bdd {

struct JacobiOperator {
  BlockDiagonalMatrix x;       // positive definite block diagonal
  BlockSparseMatrix l;         // bDD remainder, diagonal = row norm sums
  int k = 1;                   // odd step count
  double epsilon = 0.0;
  std::vector<Block> xfac;     // upper Cholesky factor per diagonal block
};

// L carries the off-diagonals of M_FF plus diagonal I_r * sum_j ||M[i,j]||;
// X = M_FF - L. For alpha-bDD input, X >= (alpha/2) L.
void split_alpha_bdd(const BlockSparseMatrix& mff, BlockDiagonalMatrix& x,
                     BlockSparseMatrix& l);

// smallest odd k >= log2(3 / epsilon)
int jacobi_steps(double epsilon);

JacobiOperator make_jacobi(const BlockSparseMatrix& mff, double epsilon);

// x^(i) = -X^{-1} L x^(i-1) + X^{-1} b, truncated after k steps; equals the
// degree-k Neumann polynomial applied to b
BlockVector jacobi_apply(const JacobiOperator& op, const BlockVector& b);

}  // namespace bdd
