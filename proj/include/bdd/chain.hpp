#pragma once

// Elimination chain container, its application as an approximate inverse,
// and wrappers for singular systems.

#include <functional>
#include <vector>

#include "bdd/block_matrix.hpp"
#include "bdd/dense.hpp"
#include "bdd/jacobi_op.hpp"

namespace bdd {

struct ChainLevel {
  BlockSparseMatrix m;       // the matrix at this level, over its local index set
  JacobiOperator z;          // inner solver for m[f, f]
  std::vector<int> f, c;     // local positions; f and c partition 0..m.n-1
  std::vector<int> f_global, c_global;  // original row labels for diagnostics
  double epsilon = 0.0;
};

struct SchurComplementChain {
  int n = 0, r = 0;
  std::vector<ChainLevel> levels;
  BlockSparseMatrix terminal_m;  // last-level matrix (possibly empty)
  DenseFactor terminal;          // its dense Cholesky factor
};

constexpr int kChainTerminalSize = 1000;

// forward sweep of partial solves, terminal dense solve, backward sweep of
// corrections; the realized operator W is linear and Hermitian, with
// W^{-1} within sum(2 epsilon_i) of the level-0 matrix
BlockVector apply_chain(const SchurComplementChain& chain, const BlockVector& b);

double chain_error_bound(const SchurComplementChain& chain);  // sum 2 eps_i

using SolverFn = std::function<BlockVector(const BlockVector&)>;
// given a matrix and an accuracy target, produce an approximate inverse
using SolverFactory = std::function<SolverFn(const BlockSparseMatrix&, double)>;

// solve M x = b for singular PSD M with smallest nonzero eigenvalue mu, by
// solving against M + eps*mu*I; the M-seminorm error is at most 6 eps
BlockVector solve_regularized(const BlockSparseMatrix& m, const BlockVector& b,
                              double epsilon, double mu,
                              const SolverFactory& make_solver);

// M Z(Z(Z(M b))) for a solver Z approximating (M + eps*mu*I)^{-1} to
// eps / (56 kappa^3); the realized operator approximates the pseudoinverse
// of M to 4 eps on its range
BlockVector pseudo_apply(const BlockSparseMatrix& m, const SolverFn& z,
                         const BlockVector& b, double epsilon, double kappa);

struct RefineResult {
  BlockVector x;
  int iterations = 0;
  std::vector<double> history;  // residual norms after each step
};

// preconditioned iterative refinement x <- x + W(b - Mx)
RefineResult refine(const SolverFn& w, const BlockSparseMatrix& m,
                    const BlockVector& b, double tol, int max_iters);

}  // namespace bdd
