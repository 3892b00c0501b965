#include "bdd/jacobi_op.hpp"

#include <cmath>
#include <string>

#include "bdd/error.hpp"

namespace bdd {

void split_alpha_bdd(const BlockSparseMatrix& mff, BlockDiagonalMatrix& x,
                     BlockSparseMatrix& l) {
  require(bdd_report(mff, 0.0).ok, ErrorKind::precondition,
          "split_alpha_bdd: matrix is not bDD");
  std::vector<double> offsums = offdiag_norm_sums(mff);
  BsmBuilder lb(mff.n, mff.r);
  for (int i = 0; i < mff.n; i++) {
    for (int k = mff.row_ptr[i]; k < mff.row_ptr[i + 1]; k++)
      if (mff.col[k] != i) lb.add(i, mff.col[k], mff.block_at(k));
    if (offsums[i] > 0.0) lb.add(i, i, Block::identity(mff.r, offsums[i]));
  }
  l = lb.finish();
  x = BlockDiagonalMatrix::zero(mff.n, mff.r);
  for (int i = 0; i < mff.n; i++) {
    Block d = mff.diag(i);
    for (int t = 0; t < mff.r; t++) d.at(t, t) -= offsums[i];
    x.set(i, d);
  }
}

int jacobi_steps(double epsilon) {
  require(epsilon > 0.0, ErrorKind::parameter, "jacobi_steps: epsilon must be positive");
  double t = std::log2(3.0 / epsilon);
  int k = static_cast<int>(std::ceil(t));
  if (k < 1) k = 1;
  if (k % 2 == 0) k += 1;
  return k;
}

JacobiOperator make_jacobi(const BlockSparseMatrix& mff, double epsilon) {
  JacobiOperator op;
  split_alpha_bdd(mff, op.x, op.l);
  op.k = jacobi_steps(epsilon);
  op.epsilon = epsilon;
  op.xfac.reserve(mff.n);
  for (int i = 0; i < mff.n; i++) {
    Block rfac(mff.r);
    if (!cholesky_upper(op.x.get(i), rfac))
      fail(ErrorKind::precondition,
           "make_jacobi: X is not positive definite at row " + std::to_string(i) +
               " (input is not sufficiently diagonally dominant)");
    op.xfac.push_back(rfac);
  }
  return op;
}

BlockVector jacobi_apply(const JacobiOperator& op, const BlockVector& b) {
  int n = op.x.n, r = op.x.r;
  require(b.n == n && b.r == r, ErrorKind::invalid_input,
          "jacobi_apply: dimension mismatch");
  auto solve_x = [&](BlockVector& v) {
    for (int i = 0; i < n; i++) cholesky_solve(op.xfac[i], v.at(i));
  };
  BlockVector x = b;
  solve_x(x);  // x^(0) = X^{-1} b
  for (int step = 0; step < op.k; step++) {
    BlockVector lx = matvec(op.l, x);
    BlockVector nxt = b;
    for (size_t t = 0; t < nxt.v.size(); t++) nxt.v[t] -= lx.v[t];
    solve_x(nxt);
    x = nxt;
  }
  return x;
}

}  // namespace bdd
