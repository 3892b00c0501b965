#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "bdd/error.hpp"
#include "bdd/jacobi_op.hpp"
#include "bdd/subset.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bdd;

namespace {
BlockSparseMatrix two_by_two(double d, double o) {
  BsmBuilder b(2, 1);
  Block db(1), ob(1);
  db.at(0, 0) = d;
  ob.at(0, 0) = o;
  b.add(0, 0, db);
  b.add(1, 1, db);
  b.add_sym(0, 1, ob);
  return b.finish();
}

double series_delta(int k) {
  double beta = 0.5;
  return std::pow(beta, k) * (1.0 + beta) / (1.0 - std::pow(beta, k + 1));
}
}  // namespace

TEST_CASE("splitting: diagonal input gives L = 0") {
  BsmBuilder b(3, 2);
  ts::Rng rng(71);
  for (int i = 0; i < 3; i++) b.add(i, i, ts::random_psd(rng, 2) + Block::identity(2, 1.0));
  BlockSparseMatrix m = b.finish();
  BlockDiagonalMatrix x;
  BlockSparseMatrix l;
  split_alpha_bdd(m, x, l);
  CHECK(l.nnz_blocks() == 0);
  for (int i = 0; i < 3; i++) CHECK(fro_norm(x.get(i) - m.diag(i)) <= 1e-12);
}

TEST_CASE("splitting: the scalar example") {
  BlockSparseMatrix m = two_by_two(5.0, -1.0);
  BlockDiagonalMatrix x;
  BlockSparseMatrix l;
  split_alpha_bdd(m, x, l);
  CHECK(l.get(0, 0).at(0, 0).real() == doctest::Approx(1.0));
  CHECK(l.get(0, 1).at(0, 0).real() == doctest::Approx(-1.0));
  CHECK(l.get(1, 1).at(0, 0).real() == doctest::Approx(1.0));
  CHECK(x.get(0).at(0, 0).real() == doctest::Approx(4.0));
  CHECK(x.get(1).at(0, 0).real() == doctest::Approx(4.0));
}

TEST_CASE("splitting invariants: X + L = M and L is bDD with tight diagonal") {
  ts::Rng rng(72);
  for (int trial = 0; trial < 8; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(3));
    BlockSparseMatrix m = ts::random_bdd(rng, 30, r, 4.0);
    BlockDiagonalMatrix x;
    BlockSparseMatrix l;
    split_alpha_bdd(m, x, l);
    DenseMatrix sum = dadd(to_matrix(to_dense(x)), to_matrix(to_dense(l)));
    CHECK(ts::rel_fro_diff(sum, to_matrix(to_dense(m))) <= 1e-12);
    CHECK(is_bdd(l));
    std::vector<double> offs = offdiag_norm_sums(l);
    for (int i = 0; i < l.n; i++) {
      Block d = l.diag(i);
      for (int a = 0; a < r; a++)
        for (int c = 0; c < r; c++)
          CHECK(std::abs(d.at(a, c) - (a == c ? offs[i] : 0.0)) <= 1e-12);
    }
  }
}

TEST_CASE("alpha = 4 implies X dominates 2L") {
  ts::Rng rng(73);
  for (int trial = 0; trial < 6; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(3));
    BlockSparseMatrix m = ts::random_bdd(rng, 25, r, 4.0);
    BlockDiagonalMatrix x;
    BlockSparseMatrix l;
    split_alpha_bdd(m, x, l);
    CHECK(loewner_leq(to_dense(scale(l, 2.0)), to_dense(diag_to_bsm(x)), 1e-9));
  }
}

TEST_CASE("step count schedule") {
  CHECK(jacobi_steps(3.0) == 1);
  CHECK(jacobi_steps(0.1) == 5);
  CHECK(jacobi_steps(0.375) == 3);
  CHECK(jacobi_steps(1e-6) % 2 == 1);
  CHECK(jacobi_steps(1e-6) >= static_cast<int>(std::log2(3e6)));
  CHECK_THROWS_AS(jacobi_steps(0.0), Error);
}

TEST_CASE("apply: L = 0 reduces to X^{-1} b") {
  BsmBuilder b(4, 2);
  ts::Rng rng(74);
  for (int i = 0; i < 4; i++) b.add(i, i, ts::random_psd(rng, 2) + Block::identity(2, 1.0));
  BlockSparseMatrix m = b.finish();
  JacobiOperator op = make_jacobi(m, 0.01);
  BlockVector rhs = ts::random_vector(rng, 4, 2);
  BlockVector got = jacobi_apply(op, rhs);
  DenseHermitian md = to_dense(m);
  std::vector<cplx> want = dense_solve(md, rhs.v);
  for (size_t i = 0; i < want.size(); i++) CHECK(std::abs(got.v[i] - want[i]) <= 1e-10);
}

TEST_CASE("apply: the constant vector is exact on the scalar example") {
  BlockSparseMatrix m = two_by_two(5.0, -1.0);
  JacobiOperator op = make_jacobi(m, 3.0);  // k = 1
  REQUIRE(op.k == 1);
  BlockVector b = BlockVector::zero(2, 1);
  b.v[0] = 1.0;
  b.v[1] = 1.0;
  BlockVector x = jacobi_apply(op, b);
  CHECK(std::abs(x.v[0] - 0.25) <= 1e-14);
  CHECK(std::abs(x.v[1] - 0.25) <= 1e-14);
}

TEST_CASE("apply matches the explicit Neumann polynomial at k = 3") {
  ts::Rng rng(75);
  for (int trial = 0; trial < 5; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(3));
    int n = 15;
    BlockSparseMatrix m = ts::random_bdd(rng, n, r, 4.0);
    JacobiOperator op = make_jacobi(m, 0.375);  // k = 3
    REQUIRE(op.k == 3);
    DenseHermitian xd = to_dense(op.x);
    DenseMatrix xinv = to_matrix(dense_inverse(xd));
    DenseMatrix ld = to_matrix(to_dense(op.l));
    DenseMatrix term = xinv;  // X^{-1} (-L X^{-1})^i, starting at i = 0
    DenseMatrix poly = xinv;
    for (int i = 1; i <= 3; i++) {
      term = dmul(term, dmul(ld, xinv));
      poly = dadd(poly, term, 1.0, (i % 2 == 1) ? -1.0 : 1.0);
    }
    BlockVector b = ts::random_vector(rng, n, r);
    BlockVector got = jacobi_apply(op, b);
    for (int i = 0; i < n * r; i++) {
      cplx want = 0.0;
      for (int j = 0; j < n * r; j++) want += poly.at(i, j) * b.v[j];
      CHECK(std::abs(got.v[i] - want) <= 1e-11);
    }
  }
}

TEST_CASE("dense materialization is linear and Hermitian") {
  ts::Rng rng(76);
  BlockSparseMatrix m = ts::random_bdd(rng, 20, 2, 4.0);
  JacobiOperator op = make_jacobi(m, 0.2);
  int nn = 40;
  auto apply = [&](const cplx* in, cplx* out) {
    BlockVector b = BlockVector::zero(20, 2);
    std::copy(in, in + nn, b.v.begin());
    BlockVector y = jacobi_apply(op, b);
    std::copy(y.v.begin(), y.v.end(), out);
  };
  DenseMatrix zd = ts::dense_from_apply(nn, apply);
  for (int i = 0; i < nn; i++)
    for (int j = 0; j < nn; j++)
      CHECK(std::abs(zd.at(i, j) - std::conj(zd.at(j, i))) <= 1e-10);

  BlockVector u = ts::random_vector(rng, 20, 2), v = ts::random_vector(rng, 20, 2);
  BlockVector uv = u;
  for (size_t t = 0; t < uv.v.size(); t++) uv.v[t] = 2.5 * u.v[t] + v.v[t];
  BlockVector zu = jacobi_apply(op, u), zv = jacobi_apply(op, v), zuv = jacobi_apply(op, uv);
  for (size_t t = 0; t < zu.v.size(); t++)
    CHECK(std::abs(zuv.v[t] - (2.5 * zu.v[t] + zv.v[t])) <= 1e-10);
}

TEST_CASE("inverse of the truncated series is sandwiched between X + L and X + (1+delta)L") {
  ts::Rng rng(77);
  for (int trial = 0; trial < 6; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(3));
    int n = 10 + static_cast<int>(rng.next_below(50));
    BlockSparseMatrix m = ts::random_bdd(rng, n, r, 4.0);
    int k = 1 + 2 * static_cast<int>(rng.next_below(3));
    double eps = 3.0 / std::pow(2.0, k);  // jacobi_steps gives exactly k
    JacobiOperator op = make_jacobi(m, eps);
    REQUIRE(op.k == k);
    int nn = n * r;
    auto apply = [&](const cplx* in, cplx* out) {
      BlockVector b = BlockVector::zero(n, r);
      std::copy(in, in + nn, b.v.begin());
      BlockVector y = jacobi_apply(op, b);
      std::copy(y.v.begin(), y.v.end(), out);
    };
    DenseHermitian zd = hermitify(ts::dense_from_apply(nn, apply), 1e-8);
    DenseHermitian zinv = dense_inverse(zd);
    DenseHermitian lo = to_dense(m);  // X + L
    double delta = series_delta(k);
    DenseHermitian hi = hermitify(dadd(to_matrix(to_dense(diag_to_bsm(op.x))),
                                       to_matrix(to_dense(op.l)), 1.0, 1.0 + delta));
    CHECK(loewner_leq(lo, zinv, 1e-8));
    CHECK(loewner_leq(zinv, hi, 1e-8));
  }
}

TEST_CASE("chain condition against the complement Schur complement") {
  ts::Rng rng(78);
  for (int trial = 0; trial < 6; trial++) {
    int r = 1 + static_cast<int>(rng.next_below(2));
    int n = 40 + static_cast<int>(rng.next_below(41));
    BlockSparseMatrix m = ts::random_bdd(rng, n, r, 0.0, 3);
    SubsetResult sel = bdd_subset(m, 4.0, 900 + trial);
    std::vector<int> f = sel.f;
    BlockSparseMatrix mff = submatrix(m, f, f);
    double eps = 0.25;
    JacobiOperator op = make_jacobi(mff, eps);
    int nn = static_cast<int>(f.size()) * r;
    auto apply = [&](const cplx* in, cplx* out) {
      BlockVector b = BlockVector::zero(static_cast<int>(f.size()), r);
      std::copy(in, in + nn, b.v.begin());
      BlockVector y = jacobi_apply(op, b);
      std::copy(y.v.begin(), y.v.end(), out);
    };
    DenseHermitian zinv = dense_inverse(hermitify(ts::dense_from_apply(nn, apply), 1e-8));
    DenseHermitian mffd = to_dense(mff);
    // 0 <= Z^{-1} - M_FF, compared at operator scale
    CHECK(loewner_leq(mffd, zinv, 1e-8));
    // Z^{-1} - M_FF <= eps * Sc, eliminating the complement of F
    std::vector<int> c = complement_indices(f, n);
    DenseHermitian sc = dense_schur(to_dense(m), expand_indices(c, r));
    DenseHermitian cap(nn);
    for (size_t t = 0; t < cap.a.size(); t++) cap.a[t] = mffd.a[t] + eps * sc.a[t];
    CHECK(loewner_leq(zinv, cap, 1e-8));
  }
}

TEST_CASE("non-PD X aborts with the offending row") {
  // an isolated row with a singular diagonal block makes X singular
  BsmBuilder b(3, 2);
  b.add(0, 0, Block::identity(2, 1.0));
  b.add(1, 1, Block::identity(2, 1.0));
  Block sing(2);
  sing.at(0, 0) = 1.0;  // rank 1
  b.add(2, 2, sing);
  CHECK_THROWS_WITH_AS(make_jacobi(b.finish(), 0.5), doctest::Contains("row 2"), Error);
}
