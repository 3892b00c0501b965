#pragma once

#include <array>
#include <complex>

#include "bdd/error.hpp"

namespace bdd {

using cplx = std::complex<double>;

// Blocks are dense row-major r x r with r <= kMaxR; r is a runtime value but
// small enough that fixed-capacity stack storage beats allocation everywhere.
constexpr int kMaxR = 8;

struct Block {
  int r = 0;
  std::array<cplx, kMaxR * kMaxR> a{};

  Block() = default;
  explicit Block(int r_) : r(r_) {
    require(r_ >= 1 && r_ <= kMaxR, ErrorKind::parameter, "block size out of range");
  }

  cplx& at(int i, int j) { return a[i * r + j]; }
  const cplx& at(int i, int j) const { return a[i * r + j]; }

  static Block zero(int r) { return Block(r); }
  static Block identity(int r, double s = 1.0) {
    Block b(r);
    for (int i = 0; i < r; i++) b.at(i, i) = s;
    return b;
  }

  Block& operator+=(const Block& o) {
    for (int i = 0; i < r * r; i++) a[i] += o.a[i];
    return *this;
  }
  Block& operator-=(const Block& o) {
    for (int i = 0; i < r * r; i++) a[i] -= o.a[i];
    return *this;
  }
  Block& operator*=(cplx s) {
    for (int i = 0; i < r * r; i++) a[i] *= s;
    return *this;
  }
  friend Block operator+(Block x, const Block& y) { return x += y; }
  friend Block operator-(Block x, const Block& y) { return x -= y; }
  friend Block operator*(Block x, cplx s) { return x *= s; }
  friend Block operator*(cplx s, Block x) { return x *= s; }
};

bool block_finite(const Block& b);
Block adjoint(const Block& b);
Block mul(const Block& x, const Block& y);         // x * y
Block mul_adj(const Block& x, const Block& y);     // x * y^*
Block adj_mul(const Block& x, const Block& y);     // x^* * y
Block hermitian_part(const Block& b);              // (b + b^*) / 2
double fro_norm(const Block& b);
bool is_zero(const Block& b, double tol = 0.0);

// largest singular value, via eigen-decomposition of b^* b
double block_op_norm(const Block& b);

// Hermitian eigen-decomposition of an N x N matrix held row-major in a;
// cyclic Jacobi with deterministic sweep order, convergence when the
// off-diagonal Frobenius mass is <= tol * ||A||_F. Eigenvalues ascending in
// w; eigenvector columns in v (may be null). Shared by block and dense code.
void jacobi_hermitian_eig(cplx* a, int n, double* w, cplx* v, double tol = 1e-13);

// eigenvalues ascending (Hermitian b); vectors as columns of v if non-null
void block_eig(const Block& b, double* w, Block* v);

// b = U diag(sigma) V^*, sigma descending; U, V unitary (completed when rank
// deficient)
void block_svd(const Block& b, Block& u, double* sigma, Block& v);

// d = (w/2)(q1 + q2) with q1, q2 unitary; w = ||d||
void unitary_split(const Block& d, double& w, Block& q1, Block& q2);

Block psd_sqrt(const Block& h);        // Hermitian PSD square root
Block psd_inv_sqrt(const Block& h);    // requires PD
Block hermitian_inverse(const Block& h);  // requires invertible Hermitian

// A = R^* R with R upper triangular; false if a pivot is not positive
bool cholesky_upper(const Block& h, Block& rfac);
// solve (R^* R) x = b given the factor from cholesky_upper (in place over x)
void cholesky_solve(const Block& rfac, cplx* x);

}  // namespace bdd
