#pragma once

// Dense reference implementations used to certify spectral claims on small
// instances. Everything here is O(N^3) and capped at N <= 3000 on purpose:
// this module exists for tests, not for solving.

#include <vector>

#include "bdd/block_matrix.hpp"

namespace bdd {

constexpr int kDenseCap = 3000;

struct DenseMatrix {
  int rows = 0, cols = 0;
  std::vector<cplx> a;  // row-major
  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, cplx(0.0)) {}
  cplx& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  const cplx& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

struct DenseHermitian {
  int N = 0;
  std::vector<cplx> a;  // row-major
  DenseHermitian() = default;
  explicit DenseHermitian(int n) : N(n), a(static_cast<size_t>(n) * n, cplx(0.0)) {}
  cplx& at(int i, int j) { return a[static_cast<size_t>(i) * N + j]; }
  const cplx& at(int i, int j) const { return a[static_cast<size_t>(i) * N + j]; }
};

DenseMatrix dmul(const DenseMatrix& x, const DenseMatrix& y);
DenseMatrix dadjoint(const DenseMatrix& x);
DenseMatrix dadd(const DenseMatrix& x, const DenseMatrix& y, cplx cx = 1.0, cplx cy = 1.0);
DenseMatrix dense_eye(int n);
double dfro(const DenseMatrix& x);

DenseMatrix to_matrix(const DenseHermitian& m);
// checks that m is Hermitian to tol * max entry; fails invalid_input otherwise
DenseHermitian hermitify(const DenseMatrix& m, double tol = 1e-9);

DenseHermitian to_dense(const BlockSparseMatrix& m);        // requires m.hermitian
DenseMatrix to_dense_rect(const BlockSparseMatrix& m);      // any shape
DenseHermitian to_dense(const BlockDiagonalMatrix& d);
DenseMatrix to_dense(const UnitaryTransferMatrix& b);       // N x (r * #edges)

// scalar indices of a block index set
std::vector<int> expand_indices(const std::vector<int>& blocks, int r);
std::vector<int> complement_indices(const std::vector<int>& sub, int n);

// Eigenvalues ascending. When v is non-null it receives a row-major N x N
// unitary whose column j is the eigenvector of w[j]. Cyclic Jacobi up to
// N = 600, Householder tridiagonalization + implicit QL above. N <= 3000.
void hermitian_eig(const DenseHermitian& m, std::vector<double>& w,
                   std::vector<cplx>* v);

double dense_op_norm(const DenseHermitian& m);  // max |eigenvalue|

// M[C,C] - M[C,F] M[F,F]^{-1} M[F,C]; F holds scalar indices, result ordered
// by the complement of F. Fails on a singular pivot block.
DenseHermitian dense_schur(const DenseHermitian& m, const std::vector<int>& f);

// smallest eps with e^{-eps} B <= A <= e^{eps} B, via eigenvalues of the
// whitened pencil B^{-1/2} A B^{-1/2}. Singular B is handled by restricting
// to its range (eigenvalue cutoff 1e-10 * lambda_max); A must vanish there.
double approx_epsilon(const DenseHermitian& a, const DenseHermitian& b);

bool loewner_leq(const DenseHermitian& a, const DenseHermitian& b, double tol);

double min_nonzero_eig(const DenseHermitian& m);
double condition_number(const DenseHermitian& m);

// pivoted Cholesky factor P M P^T = R^* R of a positive definite matrix;
// reusable across solves (terminal solver of the elimination chain)
struct DenseFactor {
  int n = 0;
  std::vector<cplx> r;  // upper triangular, row-major
  std::vector<int> perm;
};
DenseFactor dense_factor(const DenseHermitian& m);  // fails on singular pivot
void factor_solve(const DenseFactor& f, cplx* x);   // in place

std::vector<cplx> dense_solve(const DenseHermitian& m, const std::vector<cplx>& b);

DenseHermitian dense_inverse(const DenseHermitian& m);
DenseHermitian dense_pinv(const DenseHermitian& m, double rel_cut = 1e-10);

}  // namespace bdd
