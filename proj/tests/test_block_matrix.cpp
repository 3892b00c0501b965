#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "bdd/block_matrix.hpp"
#include "bdd/dense.hpp"
#include "bdd/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bdd;

namespace {
BlockSparseMatrix path2() {
  BsmBuilder b(2, 1);
  Block d(1), o(1);
  d.at(0, 0) = 2.0;
  o.at(0, 0) = -1.0;
  b.add(0, 0, d);
  b.add(1, 1, d);
  b.add_sym(0, 1, o);
  return b.finish();
}
}  // namespace

TEST_CASE("builder mirrors a lone triangle entry exactly") {
  BsmBuilder b(2, 2);
  ts::Rng rng(21);
  Block blk = ts::random_block(rng, 2);
  b.add(0, 1, blk);
  b.add(0, 0, Block::identity(2, 3.0));
  b.add(1, 1, Block::identity(2, 3.0));
  BlockSparseMatrix m = b.finish();
  Block lower = m.get(1, 0), upper = m.get(0, 1);
  for (int i = 0; i < 2; i++)
    for (int j = 0; j < 2; j++) {
      CHECK(upper.at(i, j) == blk.at(i, j));
      CHECK(lower.at(i, j) == std::conj(blk.at(j, i)));
    }
}

TEST_CASE("builder sums duplicates and averages disagreeing pairs") {
  BsmBuilder b(2, 1);
  Block one(1), three(1), five(1);
  one.at(0, 0) = 1.0;
  three.at(0, 0) = 3.0;
  five.at(0, 0) = 5.0;
  b.add(0, 0, one);
  b.add(0, 0, one);  // duplicate, sums to 2
  b.add(1, 1, one);
  b.add(0, 1, three);
  b.add(1, 0, five);  // disagrees with adjoint(three); averaged to 4
  BlockSparseMatrix m = b.finish();
  CHECK(m.get(0, 0).at(0, 0).real() == doctest::Approx(2.0));
  CHECK(m.get(0, 1).at(0, 0).real() == doctest::Approx(4.0));
  CHECK(m.get(1, 0).at(0, 0).real() == doctest::Approx(4.0));
}

TEST_CASE("builder drops numerically-zero blocks") {
  BsmBuilder b(3, 1);
  Block big(1), tiny(1);
  big.at(0, 0) = 1.0;
  tiny.at(0, 0) = 1e-16;
  b.add(0, 0, big);
  b.add(1, 1, big);
  b.add(2, 2, big);
  b.add_sym(0, 1, tiny);
  BlockSparseMatrix m = b.finish();
  CHECK(m.find(0, 1) == -1);
  CHECK(m.find(1, 0) == -1);
  CHECK(m.nnz_blocks() == 3);
}

TEST_CASE("hermitian closure of stored matrices") {
  ts::Rng rng(22);
  for (int trial = 0; trial < 10; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(3));
    BlockSparseMatrix m = ts::random_bdd(rng, 20, r);
    DenseHermitian h = to_dense(m);
    for (int i = 0; i < h.N; i++)
      for (int j = 0; j < h.N; j++)
        CHECK(std::abs(h.at(i, j) - std::conj(h.at(j, i))) <= 1e-12);
  }
}

TEST_CASE("bdd predicate on the spec'd scalar examples") {
  CHECK(is_bdd(path2()));
  BddReport rep = bdd_report(path2(), 0.0);
  CHECK(rep.slack[0] == doctest::Approx(1.0));
  CHECK(rep.slack[1] == doctest::Approx(1.0));

  BsmBuilder b(2, 1);
  Block one(1), mtwo(1);
  one.at(0, 0) = 1.0;
  mtwo.at(0, 0) = -2.0;
  b.add(0, 0, one);
  b.add(1, 1, one);
  b.add_sym(0, 1, mtwo);
  CHECK_FALSE(is_bdd(b.finish()));

  BsmBuilder c(3, 1);
  for (int i = 0; i < 3; i++) c.add(i, i, one);
  CHECK(is_bdd(c.finish()));
}

TEST_CASE("alpha-bdd thresholds") {
  BsmBuilder b(2, 1);
  Block five(1), mone(1);
  five.at(0, 0) = 5.0;
  mone.at(0, 0) = -1.0;
  b.add(0, 0, five);
  b.add(1, 1, five);
  b.add_sym(0, 1, mone);
  BlockSparseMatrix m = b.finish();
  CHECK(is_alpha_bdd(m, 4.0));
  CHECK_FALSE(is_alpha_bdd(m, 4.5));
  CHECK_THROWS_AS(is_alpha_bdd(m, -1.0), Error);

  BsmBuilder d(4, 2);
  for (int i = 0; i < 4; i++) d.add(i, i, Block::identity(2, 1.0));
  CHECK(is_alpha_bdd(d.finish(), 1000.0));
}

TEST_CASE("sign-flip closure") {
  ts::Rng rng(23);
  for (int trial = 0; trial < 10; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(3));
    BlockSparseMatrix m = ts::random_bdd(rng, 25, r);
    BsmBuilder b(m.n, m.r);
    for (int i = 0; i < m.n; i++)
      for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
        Block blk = m.block_at(k);
        if (m.col[k] != i) blk *= cplx(-1.0);
        b.add(i, m.col[k], blk);
      }
    BlockSparseMatrix flipped = b.finish();
    CHECK(is_bdd(flipped));
    BddReport r1 = bdd_report(m, 0.0), r2 = bdd_report(flipped, 0.0);
    for (int i = 0; i < m.n; i++)
      CHECK(r1.slack[i] == doctest::Approx(r2.slack[i]).epsilon(1e-12));
  }
}

TEST_CASE("factorize: diagonal matrix gives X = M and no edges") {
  BsmBuilder b(3, 2);
  ts::Rng rng(24);
  for (int i = 0; i < 3; i++) b.add(i, i, ts::random_psd(rng, 2) + Block::identity(2, 0.5));
  BlockSparseMatrix m = b.finish();
  BlockDiagonalMatrix x;
  UnitaryTransferMatrix bt;
  factorize_bdd(m, x, bt);
  CHECK(bt.edges.empty());
  for (int i = 0; i < 3; i++) {
    Block diff = x.get(i) - m.diag(i);
    CHECK(fro_norm(diff) <= 1e-12);
  }
}

TEST_CASE("factorize: scalar path splits into Laplacian plus identity") {
  BlockSparseMatrix m = path2();
  BlockDiagonalMatrix x;
  UnitaryTransferMatrix bt;
  factorize_bdd(m, x, bt);
  CHECK(x.get(0).at(0, 0).real() == doctest::Approx(1.0));
  CHECK(x.get(1).at(0, 0).real() == doctest::Approx(1.0));
  CHECK(bt.edges.size() == 2);
  DenseMatrix bd = to_dense(bt);
  DenseMatrix bbt = dmul(bd, dadjoint(bd));
  CHECK(bbt.at(0, 0).real() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(bbt.at(0, 1).real() == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(bbt.at(1, 1).real() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("factorize: edge blocks satisfy the transfer invariant") {
  ts::Rng rng(25);
  BlockSparseMatrix m = ts::random_bdd(rng, 20, 2);
  BlockDiagonalMatrix x;
  UnitaryTransferMatrix bt;
  factorize_bdd(m, x, bt);
  for (const TransferEdge& e : bt.edges) {
    CHECK(e.u != e.v);
    for (const Block* q : {&e.qu, &e.qv}) {
      Block qq = mul_adj(*q, *q);
      for (int i = 0; i < 2; i++)
        for (int j = 0; j < 2; j++) {
          double want = (i == j) ? e.w : 0.0;
          CHECK(std::abs(qq.at(i, j) - want) <= 1e-10 * std::max(e.w, 1.0));
        }
    }
  }
}

TEST_CASE("factorization identity on random instances") {
  ts::Rng rng(26);
  for (int trial = 0; trial < 8; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(3));
    int n = 10 + static_cast<int>(rng.next_below(91));
    BlockSparseMatrix m = ts::random_bdd(rng, n, r);
    BlockDiagonalMatrix x;
    UnitaryTransferMatrix bt;
    factorize_bdd(m, x, bt);
    DenseMatrix xd = to_matrix(to_dense(x));
    DenseMatrix bd = to_dense(bt);
    DenseMatrix rec = dadd(xd, dmul(bd, dadjoint(bd)));
    CHECK(ts::rel_fro_diff(rec, to_matrix(to_dense(m))) <= 1e-9);

    // X is PSD: the factorization also proves M itself is PSD
    std::vector<double> w;
    hermitian_eig(to_dense(x), w, nullptr);
    CHECK(w[0] >= -1e-9 * std::max(std::abs(w.back()), 1.0));
    hermitian_eig(to_dense(m), w, nullptr);
    CHECK(w[0] >= -1e-9 * std::max(std::abs(w.back()), 1.0));
  }
}

TEST_CASE("factorize: r=2 reconstruction at n=20 is entrywise tight") {
  ts::Rng rng(27);
  BlockSparseMatrix m = ts::random_bdd(rng, 20, 2);
  BlockDiagonalMatrix x;
  UnitaryTransferMatrix bt;
  factorize_bdd(m, x, bt);
  DenseMatrix rec = dadd(to_matrix(to_dense(x)),
                         dmul(to_dense(bt), dadjoint(to_dense(bt))));
  DenseHermitian md = to_dense(m);
  double scale = 0.0;
  for (const cplx& c : md.a) scale = std::max(scale, std::abs(c));
  for (int i = 0; i < md.N; i++)
    for (int j = 0; j < md.N; j++)
      CHECK(std::abs(rec.at(i, j) - md.at(i, j)) <= 1e-10 * std::max(scale, 1.0));
}

TEST_CASE("factorize rejects non-bdd input naming a row") {
  BsmBuilder b(2, 1);
  Block one(1), mtwo(1);
  one.at(0, 0) = 1.0;
  mtwo.at(0, 0) = -2.0;
  b.add(0, 0, one);
  b.add(1, 1, one);
  b.add_sym(0, 1, mtwo);
  BlockSparseMatrix m = b.finish();
  BlockDiagonalMatrix x;
  UnitaryTransferMatrix bt;
  CHECK_THROWS_WITH_AS(factorize_bdd(m, x, bt),
                       doctest::Contains("row"), Error);
}

TEST_CASE("assemble_from_factors round trips") {
  ts::Rng rng(28);
  BlockSparseMatrix m = ts::random_bdd(rng, 15, 3);
  BlockDiagonalMatrix x;
  UnitaryTransferMatrix bt;
  factorize_bdd(m, x, bt);
  BlockSparseMatrix m2 = assemble_from_factors(x, bt);
  CHECK(ts::rel_fro_diff(to_matrix(to_dense(m2)), to_matrix(to_dense(m))) <= 1e-10);
}

TEST_CASE("matvec matches dense multiplication") {
  ts::Rng rng(29);
  for (int trial = 0; trial < 10; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(3));
    BlockSparseMatrix m = ts::random_bdd(rng, 20, r);
    BlockVector xv = ts::random_vector(rng, 20, r);
    BlockVector y = matvec(m, xv);
    DenseHermitian h = to_dense(m);
    for (int i = 0; i < h.N; i++) {
      cplx want = 0.0;
      for (int j = 0; j < h.N; j++) want += h.at(i, j) * xv.v[j];
      CHECK(std::abs(y.v[i] - want) <= 1e-10);
    }
  }

  BlockSparseMatrix eye = pad_identity(BsmBuilder(5, 2).finish(), 1.0);
  BlockVector xv = ts::random_vector(rng, 5, 2);
  BlockVector y = matvec(eye, xv);
  for (size_t i = 0; i < xv.v.size(); i++) CHECK(y.v[i] == xv.v[i]);
}

TEST_CASE("submatrix on the path example and against dense slices") {
  BlockSparseMatrix m = path2();
  BlockSparseMatrix s = submatrix(m, {1}, {1});
  CHECK(s.n == 1);
  CHECK(s.get(0, 0).at(0, 0).real() == doctest::Approx(2.0));

  ts::Rng rng(30);
  BlockSparseMatrix big = ts::random_bdd(rng, 30, 2);
  std::vector<int> rows = rng.subset(30, 12), cols = rng.subset(30, 9);
  BlockSparseMatrix sub = submatrix(big, rows, cols);
  CHECK_FALSE(sub.hermitian);
  DenseMatrix sd = to_dense_rect(sub);
  DenseHermitian bd = to_dense(big);
  for (size_t i = 0; i < rows.size(); i++)
    for (size_t j = 0; j < cols.size(); j++)
      for (int a = 0; a < 2; a++)
        for (int c = 0; c < 2; c++)
          CHECK(sd.at(static_cast<int>(i) * 2 + a, static_cast<int>(j) * 2 + c) ==
                bd.at(rows[i] * 2 + a, cols[j] * 2 + c));

  BlockSparseMatrix diag = submatrix(big, rows, rows);
  CHECK(diag.hermitian);
  CHECK(is_bdd(diag));  // principal submatrices of bDD stay bDD
}

TEST_CASE("masked matvec adds a scaled rectangular product") {
  ts::Rng rng(31);
  BlockSparseMatrix m = ts::random_bdd(rng, 25, 2);
  std::vector<int> rows = rng.subset(25, 10), cols = rng.subset(25, 8);
  BlockVector x = ts::random_vector(rng, 8, 2);
  BlockVector y = ts::random_vector(rng, 10, 2);
  BlockVector y0 = y;
  masked_matvec_add(m, rows, cols, x, y, cplx(-2.0));
  BlockSparseMatrix sub = submatrix(m, rows, cols);
  BlockVector want = matvec(sub, x);
  for (size_t i = 0; i < y.v.size(); i++)
    CHECK(std::abs(y.v[i] - (y0.v[i] - 2.0 * want.v[i])) <= 1e-12);
}

TEST_CASE("pad_identity and scale") {
  BlockSparseMatrix z = BsmBuilder(4, 2).finish();
  BlockSparseMatrix eye = pad_identity(z, 1.0);
  DenseHermitian h = to_dense(eye);
  for (int i = 0; i < h.N; i++)
    for (int j = 0; j < h.N; j++)
      CHECK(h.at(i, j) == cplx(i == j ? 1.0 : 0.0));

  ts::Rng rng(32);
  BlockSparseMatrix m = ts::random_bdd(rng, 10, 2);
  BlockSparseMatrix twice = scale(m, 2.0);
  CHECK(ts::rel_fro_diff(to_matrix(to_dense(twice)),
                         dadd(to_matrix(to_dense(m)), to_matrix(to_dense(m)))) <= 1e-12);
  for (int k = 0; k < m.nnz_blocks(); k++)
    CHECK(twice.bnorm[k] == doctest::Approx(2.0 * m.bnorm[k]).epsilon(1e-12));
}

TEST_CASE("add_scaled merges patterns") {
  ts::Rng rng(33);
  BlockSparseMatrix a = ts::random_bdd(rng, 12, 2);
  BlockSparseMatrix b = ts::random_bdd(rng, 12, 2);
  BlockSparseMatrix c = add_scaled(a, b, 0.5, 2.0);
  DenseMatrix want = dadd(to_matrix(to_dense(a)), to_matrix(to_dense(b)), 0.5, 2.0);
  CHECK(ts::rel_fro_diff(to_matrix(to_dense(c)), want) <= 1e-12);
}

TEST_CASE("vector helpers") {
  ts::Rng rng(34);
  BlockVector x = ts::random_vector(rng, 6, 2), y = ts::random_vector(rng, 6, 2);
  cplx d = vec_dot(x, y);
  cplx want = 0.0;
  for (size_t i = 0; i < x.v.size(); i++) want += std::conj(x.v[i]) * y.v[i];
  CHECK(std::abs(d - want) <= 1e-12);
  CHECK(vec_norm(x) == doctest::Approx(std::sqrt(vec_dot(x, x).real())).epsilon(1e-12));
  BlockVector z = x;
  vec_axpy(z, cplx(2.0), y);
  for (size_t i = 0; i < z.v.size(); i++)
    CHECK(std::abs(z.v[i] - (x.v[i] + 2.0 * y.v[i])) <= 1e-12);
}
