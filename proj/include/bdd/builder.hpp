#pragma once

// Top-level constructions: the elimination chain built by repeated subset
// selection and approximate Schur complementation, and the U^* D U
// factorization distilled from the same process.

#include <cstdint>
#include <vector>

#include "bdd/block_matrix.hpp"
#include "bdd/chain.hpp"
#include "bdd/dense.hpp"
#include "bdd/jacobi_op.hpp"

namespace bdd {

struct BuilderParams {
  int k = 4;               // iterations per resampling phase
  double c = 1.0;          // growth exponent of the undersampling schedule
  int k_cap = 32;          // clamp on the undersampling factor
  int terminal_size = kChainTerminalSize;  // hand off to a dense factor here
  double alpha = 4.0;      // dominance target for the eliminated sets
  double trigger_ratio = 64.0;  // resample when m/n > trigger_ratio * log2 n
  uint64_t seed = 0;
};

// (i + 8)^{-2}: per-level accuracy of the chain schedule; the sum over all
// levels is a small constant, so the chain certifies end to end
double builder_epsilon(int i);

// 1 / (8 (i + 2)^2): per-level accuracy of the factorization schedule,
// tight enough that the total quality loss stays under 3/4
double decompose_epsilon(int i);

// min(2^(2 c k log2^2((j-1)k + 1)), k_cap): cheap crude scores early on,
// clamped so desk-scale builds stay in memory
int builder_undersampling(const BuilderParams& p, int phase);

// Repeatedly selects an alpha-bDD subset, attaches its polynomial inner
// solver and replaces the matrix by an approximate Schur complement; at
// phase boundaries a dense level is first resampled down, with the inner
// solves provided by recursively built chains. Stops at terminal_size and
// attaches a dense factor.
SchurComplementChain recursive_construct(const BlockSparseMatrix& m0,
                                         const BuilderParams& params = {});

struct UDULevel {
  std::vector<int> f, c;   // local positions within this level's index set
  JacobiOperator z;        // polynomial inverse of m[f,f]; carries the X factor
  BlockSparseMatrix m_fc;  // rectangular coupling slice of the level matrix
  double epsilon = 0.0;
};

// M ~= U^* D U with D block diagonal (the Jacobi splitting X of each level,
// identity on the terminal corner) and U unit upper triangular in the
// elimination order: U[F_i, C_i] = Z_i M_i[F_i, C_i], with the terminal
// corner holding the Cholesky factor of the last matrix.
struct UDUFactorization {
  int n = 0, r = 0;
  std::vector<UDULevel> levels;
  BlockSparseMatrix terminal_m;
  DenseMatrix terminal_u;  // unpivoted upper Cholesky factor of terminal_m
  std::vector<int> perm;   // elimination order as original block indices
};

UDUFactorization decompose(const BlockSparseMatrix& m0,
                           const BuilderParams& params = {});

// x = U^{-1} D^{-1} U^{-*} b by two substitution sweeps with Z applied in
// polynomial form; combine with refine for high-accuracy solves
BlockVector udu_solve(const UDUFactorization& f, const BlockVector& b);

// Dense materializations in the elimination order, for certification at
// small sizes (subject to the dense oracle cap). The pair is normalized so
// that U is exactly unit upper triangular: the diagonal of the terminal
// Cholesky factor is folded into D, leaving the product U^* D U unchanged.
DenseMatrix udu_dense_u(const UDUFactorization& f);
DenseMatrix udu_dense_d(const UDUFactorization& f);

// stored blocks across levels: couplings, Jacobi splittings, terminal factor
long long udu_stored_blocks(const UDUFactorization& f);

}  // namespace bdd
