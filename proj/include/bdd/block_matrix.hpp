#pragma once

#include <vector>

#include "bdd/block.hpp"

namespace bdd {

// Hermitian n x n matrix of r x r blocks, sparse by block. Both triangles are
// stored so every algorithm gets O(1) block-row access; the builder enforces
// M[j,i] = M[i,j]^* exactly and drops numerically-zero blocks. Operator norms
// of all blocks are cached at construction (bnorm), since the bDD predicates,
// subset selection and the Jacobi split all consume the same norms.
//
// A rectangular slice (hermitian == false) uses the same storage with nc
// columns; the Hermitian invariants then do not apply.
struct BlockSparseMatrix {
  int n = 0;   // block rows
  int nc = 0;  // block columns (== n when hermitian)
  int r = 1;
  bool hermitian = true;
  std::vector<int> row_ptr;  // n + 1
  std::vector<int> col;      // per stored block
  std::vector<cplx> val;     // r*r per stored block, row-major
  std::vector<double> bnorm; // operator norm per stored block

  int nnz_blocks() const { return static_cast<int>(col.size()); }
  const cplx* block_data(int k) const { return &val[static_cast<size_t>(k) * r * r]; }
  cplx* block_data(int k) { return &val[static_cast<size_t>(k) * r * r]; }
  Block block_at(int k) const {
    Block b(r);
    const cplx* p = block_data(k);
    for (int i = 0; i < r * r; i++) b.a[i] = p[i];
    return b;
  }
  // index of stored block (i, j), or -1
  int find(int i, int j) const;
  Block get(int i, int j) const {  // zero when absent
    int k = find(i, j);
    return k < 0 ? Block::zero(r) : block_at(k);
  }
  Block diag(int i) const { return get(i, i); }
};

// Accumulating builder; duplicate (i, j) entries are summed. finish()
// sorts, merges, symmetrizes (mirroring a lone triangle entry, averaging a
// disagreeing pair) and drops blocks below 1e-14 of the largest block norm.
class BsmBuilder {
 public:
  BsmBuilder(int n, int r) : n_(n), r_(r) {}
  void add(int i, int j, const Block& b);
  // adds b at (i, j) and b^* at (j, i); i == j adds the Hermitian part
  void add_sym(int i, int j, const Block& b);
  BlockSparseMatrix finish();

 private:
  int n_, r_;
  std::vector<int> ti_, tj_;
  std::vector<cplx> tv_;
};

struct BlockDiagonalMatrix {
  int n = 0;
  int r = 1;
  std::vector<cplx> val;  // n blocks, r*r each

  static BlockDiagonalMatrix zero(int n, int r) {
    BlockDiagonalMatrix d;
    d.n = n;
    d.r = r;
    d.val.assign(static_cast<size_t>(n) * r * r, cplx(0.0));
    return d;
  }
  cplx* block_data(int i) { return &val[static_cast<size_t>(i) * r * r]; }
  const cplx* block_data(int i) const { return &val[static_cast<size_t>(i) * r * r]; }
  Block get(int i) const {
    Block b(r);
    const cplx* p = block_data(i);
    for (int k = 0; k < r * r; k++) b.a[k] = p[k];
    return b;
  }
  void set(int i, const Block& b) {
    cplx* p = block_data(i);
    for (int k = 0; k < r * r; k++) p[k] = b.a[k];
  }
};

struct BlockVector {
  int n = 0;
  int r = 1;
  std::vector<cplx> v;  // n * r

  static BlockVector zero(int n, int r) {
    BlockVector x;
    x.n = n;
    x.r = r;
    x.v.assign(static_cast<size_t>(n) * r, cplx(0.0));
    return x;
  }
  cplx* at(int i) { return &v[static_cast<size_t>(i) * r]; }
  const cplx* at(int i) const { return &v[static_cast<size_t>(i) * r]; }
};

double vec_norm(const BlockVector& x);
cplx vec_dot(const BlockVector& x, const BlockVector& y);  // x^* y
void vec_axpy(BlockVector& y, cplx a, const BlockVector& x);

// Block edge-vertex factor: each edge is one block column with nonzero
// blocks qu at u and qv at v, qu qu^* = qv qv^* = w I_r.
struct TransferEdge {
  int u = 0, v = 0;
  double w = 0.0;
  Block qu, qv;
};
struct UnitaryTransferMatrix {
  int n = 0;
  int r = 1;
  std::vector<TransferEdge> edges;
};

// ---- predicates ----

struct BddReport {
  bool ok = false;
  std::vector<double> slack;  // lambda_min(M[i,i]) - (1+alpha) * sum of row norms
  int worst_row = -1;
};

BddReport bdd_report(const BlockSparseMatrix& m, double alpha = 0.0);
bool is_bdd(const BlockSparseMatrix& m);
bool is_alpha_bdd(const BlockSparseMatrix& m, double alpha);

// per-row sums of off-diagonal block operator norms
std::vector<double> offdiag_norm_sums(const BlockSparseMatrix& m);

// ---- structural factorization ----

// M = X + B B^* with X = diag(M[i,i] - I_r * sum_j ||M[i,j]||); two edges per
// off-diagonal pair, each carrying sqrt(||M[i,j]||/2) times a unitary
void factorize_bdd(const BlockSparseMatrix& m, BlockDiagonalMatrix& x,
                   UnitaryTransferMatrix& b);

// X + B B^* reassembled as an explicit matrix
BlockSparseMatrix assemble_from_factors(const BlockDiagonalMatrix& x,
                                        const UnitaryTransferMatrix& b);

// ---- plumbing ----

BlockVector matvec(const BlockSparseMatrix& m, const BlockVector& x);
// y += s * M[rows, cols] x over explicit index sets (global labels); x is
// indexed by position in cols, y by position in rows
void masked_matvec_add(const BlockSparseMatrix& m, const std::vector<int>& rows,
                       const std::vector<int>& cols, const BlockVector& x,
                       BlockVector& y, cplx s);

// principal (rows == cols) or rectangular submatrix, relabeled by position
BlockSparseMatrix submatrix(const BlockSparseMatrix& m, const std::vector<int>& rows,
                            const std::vector<int>& cols);
BlockSparseMatrix add_scaled(const BlockSparseMatrix& a, const BlockSparseMatrix& b,
                             cplx ca, cplx cb);
BlockSparseMatrix scale(const BlockSparseMatrix& m, cplx s);
BlockSparseMatrix pad_identity(const BlockSparseMatrix& m, double xi);

BlockSparseMatrix diag_to_bsm(const BlockDiagonalMatrix& d);

}  // namespace bdd
