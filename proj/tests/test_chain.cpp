#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bdd/chain.hpp"
#include "bdd/dense.hpp"
#include "bdd/error.hpp"
#include "bdd/jacobi_op.hpp"
#include "bdd/rng.hpp"
#include "bdd/subset.hpp"
#include "test_support.hpp"

using namespace bdd;
using namespace ts;

namespace {

double inner_eps(int i) { return 1.0 / (8.0 * (i + 2.0) * (i + 2.0)); }

// chain whose level transitions are exact dense Schur complements, so the
// only approximation left is the truncated inner solver at each level
SchurComplementChain exact_schur_chain(Rng& rng, const BlockSparseMatrix& m0,
                                       int depth, double alpha,
                                       double fixed_eps = -1.0) {
  SchurComplementChain ch;
  ch.n = m0.n;
  ch.r = m0.r;
  BlockSparseMatrix cur = m0;
  for (int d = 0; d < depth && cur.n > 4; d++) {
    double eps = fixed_eps > 0.0 ? fixed_eps : inner_eps(d);
    SubsetResult sr = bdd_subset(cur, alpha, rng.next_u64());
    ChainLevel lev;
    lev.m = cur;
    lev.f = sr.f;
    lev.c = complement_indices(sr.f, cur.n);
    lev.f_global = lev.f;
    lev.c_global = lev.c;
    lev.epsilon = eps;
    lev.z = make_jacobi(submatrix(cur, lev.f, lev.f), eps);
    DenseHermitian sc = dense_schur(to_dense(cur), expand_indices(lev.f, m0.r));
    BlockSparseMatrix nxt = from_dense(sc, m0.r);
    ch.levels.push_back(std::move(lev));
    cur = std::move(nxt);
  }
  ch.terminal_m = cur;
  if (cur.n > 0) ch.terminal = dense_factor(to_dense(cur));
  return ch;
}

DenseHermitian chain_matrix(const SchurComplementChain& ch) {
  int nn = ch.n * ch.r;
  DenseMatrix w = dense_from_apply(nn, [&](const cplx* in, cplx* out) {
    BlockVector b = BlockVector::zero(ch.n, ch.r);
    std::copy(in, in + nn, b.v.begin());
    BlockVector y = apply_chain(ch, b);
    std::copy(y.v.begin(), y.v.end(), out);
  });
  return hermitify(w, 1e-7);
}

DenseHermitian dh_scale(const DenseHermitian& m, double s) {
  DenseHermitian out = m;
  for (cplx& c : out.a) c *= s;
  return out;
}

DenseHermitian dh_add(const DenseHermitian& a, const DenseHermitian& b, double ca, double cb) {
  DenseHermitian out = a;
  for (size_t i = 0; i < out.a.size(); i++) out.a[i] = ca * a.a[i] + cb * b.a[i];
  return out;
}

BlockVector dh_apply(const DenseHermitian& m, const BlockVector& b) {
  BlockVector y = BlockVector::zero(b.n, b.r);
  int nn = b.n * b.r;
  for (int i = 0; i < nn; i++) {
    cplx s = 0.0;
    for (int j = 0; j < nn; j++) s += m.at(i, j) * b.v[static_cast<size_t>(j)];
    y.v[static_cast<size_t>(i)] = s;
  }
  return y;
}

// solver factory backed by an explicit dense inverse of whatever it is given
SolverFn exact_dense_solver(const BlockSparseMatrix& sm, double) {
  DenseHermitian inv = dense_inverse(to_dense(sm));
  return [inv](const BlockVector& b) { return dh_apply(inv, b); };
}

double m_norm_sq(const BlockSparseMatrix& m, const BlockVector& x) {
  return std::real(vec_dot(x, matvec(m, x)));
}

}  // namespace

TEST_CASE("terminal-only chain matches a dense solve") {
  Rng rng(401);
  BlockSparseMatrix m = random_bdd(rng, 12, 2, 0.0);
  SchurComplementChain ch;
  ch.n = m.n;
  ch.r = m.r;
  ch.terminal_m = m;
  ch.terminal = dense_factor(to_dense(m));

  BlockVector b = random_vector(rng, m.n, m.r);
  BlockVector x = apply_chain(ch, b);
  std::vector<cplx> xd = dense_solve(to_dense(m), b.v);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < xd.size(); i++) {
    num += std::norm(x.v[i] - xd[i]);
    den += std::norm(xd[i]);
  }
  CHECK(std::sqrt(num / den) <= 1e-10);
  CHECK(chain_error_bound(ch) == 0.0);
}

TEST_CASE("one level with a near-exact inner solver inverts the matrix") {
  Rng rng(402);
  BlockSparseMatrix m = random_bdd(rng, 30, 2, 4.0);
  SchurComplementChain ch = exact_schur_chain(rng, m, 1, 4.0, 1e-12);
  REQUIRE(ch.levels.size() == 1);

  DenseHermitian w = chain_matrix(ch);
  DenseMatrix prod = dmul(to_matrix(w), to_matrix(to_dense(m)));
  CHECK(rel_fro_diff(prod, dense_eye(m.n * m.r)) <= 1e-7);
}

TEST_CASE("chain inverse tracks the level-0 matrix within the accumulated bound") {
  Rng rng(403);
  BlockSparseMatrix m = random_bdd(rng, 200, 2, 4.0);
  SchurComplementChain ch = exact_schur_chain(rng, m, 3, 4.0);
  REQUIRE(ch.levels.size() == 3);
  CHECK(ch.terminal_m.n < m.n);

  double bound = chain_error_bound(ch);
  CHECK(bound == doctest::Approx(2.0 * (inner_eps(0) + inner_eps(1) + inner_eps(2))));

  DenseHermitian w = chain_matrix(ch);
  DenseHermitian winv = dense_inverse(w);
  double eps = approx_epsilon(winv, to_dense(m));
  CHECK(eps <= bound + 1e-6);
}

TEST_CASE("the chain operator is linear and self-adjoint") {
  Rng rng(404);
  BlockSparseMatrix m = random_bdd(rng, 60, 2, 4.0);
  SchurComplementChain ch = exact_schur_chain(rng, m, 2, 4.0);

  BlockVector u = random_vector(rng, m.n, m.r);
  BlockVector v = random_vector(rng, m.n, m.r);
  cplx a(0.7, -1.3);

  BlockVector uv = v;
  vec_axpy(uv, a, u);  // uv = a u + v
  BlockVector w1 = apply_chain(ch, uv);
  BlockVector w2 = apply_chain(ch, v);
  vec_axpy(w2, a, apply_chain(ch, u));
  vec_axpy(w2, cplx(-1.0), w1);
  CHECK(vec_norm(w2) <= 1e-10 * vec_norm(w1));

  cplx s1 = vec_dot(u, apply_chain(ch, v));
  cplx s2 = vec_dot(v, apply_chain(ch, u));
  CHECK(std::abs(s1 - std::conj(s2)) <= 1e-10 * vec_norm(u) * vec_norm(v));
}

TEST_CASE("error bound sums the per-level budgets") {
  SchurComplementChain ch;
  CHECK(chain_error_bound(ch) == 0.0);
  ChainLevel a, b;
  a.epsilon = 0.1;
  b.epsilon = 0.02;
  ch.levels.push_back(a);
  ch.levels.push_back(b);
  CHECK(chain_error_bound(ch) == doctest::Approx(0.24));

  double sched = 0.0;
  for (int i = 0; i < 4; i++) sched += 2.0 * inner_eps(i);
  CHECK(sched == doctest::Approx(0.25 * (1.0 / 4 + 1.0 / 9 + 1.0 / 16 + 1.0 / 25)));
}

TEST_CASE("replacing the pivot block by the inner inverse sandwiches the matrix") {
  Rng rng(405);
  const double eps = 0.25;
  BlockSparseMatrix m = random_bdd(rng, 40, 1, 4.0);
  SubsetResult sr = bdd_subset(m, 4.0, rng.next_u64());
  std::vector<int> f = sr.f, c = complement_indices(f, m.n);
  BlockSparseMatrix mff = submatrix(m, f, f);
  JacobiOperator z = make_jacobi(mff, eps);

  int nf = static_cast<int>(f.size()) * m.r;
  DenseMatrix zm = dense_from_apply(nf, [&](const cplx* in, cplx* out) {
    BlockVector b = BlockVector::zero(static_cast<int>(f.size()), m.r);
    std::copy(in, in + nf, b.v.begin());
    BlockVector y = jacobi_apply(z, b);
    std::copy(y.v.begin(), y.v.end(), out);
  });
  DenseHermitian zinv = dense_inverse(hermitify(zm, 1e-8));

  DenseHermitian md = to_dense(m);
  DenseHermitian mffd = to_dense(mff);
  DenseHermitian sc = dense_schur(md, expand_indices(c, m.r));  // onto f

  std::vector<int> fs = expand_indices(f, m.r);
  auto hat = [&](double t) {
    DenseHermitian h = md;
    for (size_t a = 0; a < fs.size(); a++)
      for (size_t b = 0; b < fs.size(); b++)
        h.at(fs[a], fs[b]) = t * zinv.at(static_cast<int>(a), static_cast<int>(b));
    return h;
  };

  // inner condition and whole-matrix condition hold together
  CHECK(loewner_leq(mffd, zinv, 1e-8));
  CHECK(loewner_leq(zinv, dh_add(mffd, sc, 1.0, eps), 1e-8));
  CHECK(loewner_leq(md, hat(1.0), 1e-8));
  CHECK(loewner_leq(hat(1.0), dh_scale(md, 1.0 + eps), 1e-8));

  // and they fail together, on the same side
  CHECK(!loewner_leq(mffd, dh_scale(zinv, 0.5), 1e-8));
  CHECK(!loewner_leq(md, hat(0.5), 1e-8));
  CHECK(!loewner_leq(dh_scale(zinv, 2.0), dh_add(mffd, sc, 1.0, eps), 1e-8));
  CHECK(!loewner_leq(hat(2.0), dh_scale(md, 1.0 + eps), 1e-8));
}

TEST_CASE("regularized solve on a positive definite system meets the error bound") {
  Rng rng(406);
  BlockSparseMatrix m = random_bdd(rng, 40, 1, 0.0);
  BlockVector b = random_vector(rng, m.n, m.r);
  DenseHermitian md = to_dense(m);
  double mu = min_nonzero_eig(md);
  const double eps = 0.01;

  BlockVector xr = solve_regularized(m, b, eps, mu, exact_dense_solver);
  BlockVector xs = b;
  xs.v = dense_solve(md, b.v);

  BlockVector e = xr;
  vec_axpy(e, cplx(-1.0), xs);
  CHECK(m_norm_sq(m, e) <= 6.0 * eps * m_norm_sq(m, xs) + 1e-12);
}

TEST_CASE("regularized solve on a singular system stays within the seminorm budget") {
  Rng rng(407);
  std::vector<Block> frame;
  BlockSparseMatrix m = random_connection_laplacian(rng, 40, 2, 3, true, &frame);
  DenseHermitian md = to_dense(m);
  double mu = min_nonzero_eig(md);
  const double eps = 0.05;

  // lifted frame columns span the null space; project them out of b
  std::vector<BlockVector> nulls;
  for (int k = 0; k < m.r; k++) {
    BlockVector v = BlockVector::zero(m.n, m.r);
    for (int i = 0; i < m.n; i++)
      for (int q = 0; q < m.r; q++) v.at(i)[q] = frame[static_cast<size_t>(i)].at(q, k);
    double nv = vec_norm(v);
    for (cplx& cc : v.v) cc /= nv;
    nulls.push_back(v);
  }
  BlockVector b = random_vector(rng, m.n, m.r);
  for (const BlockVector& v : nulls) vec_axpy(b, -vec_dot(v, b), v);
  CHECK(vec_norm(matvec(m, nulls[0])) <= 1e-10 * m.n);

  BlockVector xr = solve_regularized(m, b, eps, mu, exact_dense_solver);
  BlockVector xs = dh_apply(dense_pinv(md), b);

  BlockVector e = xr;
  vec_axpy(e, cplx(-1.0), xs);
  CHECK(m_norm_sq(m, e) <= 6.0 * eps * m_norm_sq(m, xs) + 1e-10);

  BlockVector zero = BlockVector::zero(m.n, m.r);
  BlockVector xz = solve_regularized(m, zero, eps, mu, exact_dense_solver);
  CHECK(vec_norm(xz) == 0.0);
}

TEST_CASE("regularized solve rejects out-of-range parameters") {
  Rng rng(408);
  BlockSparseMatrix m = random_bdd(rng, 6, 1, 0.0);
  BlockVector b = random_vector(rng, m.n, m.r);
  CHECK_THROWS_AS(solve_regularized(m, b, 0.6, 1.0, exact_dense_solver), Error);
  CHECK_THROWS_AS(solve_regularized(m, b, 0.0, 1.0, exact_dense_solver), Error);
  CHECK_THROWS_AS(solve_regularized(m, b, 0.1, 0.0, exact_dense_solver), Error);
  try {
    solve_regularized(m, b, 0.6, 1.0, exact_dense_solver);
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::parameter);
  }
  BlockVector bad = random_vector(rng, m.n + 1, m.r);
  CHECK_THROWS_AS(solve_regularized(m, bad, 0.1, 1.0, exact_dense_solver), Error);
}

TEST_CASE("pseudoinverse application on the identity") {
  const int n = 8;
  const double eps = 0.1;
  BsmBuilder bld(n, 1);
  for (int i = 0; i < n; i++) bld.add(i, i, Block::identity(1));
  BlockSparseMatrix m = bld.finish();

  // exact inverse of I + eps*I
  SolverFn z = [eps](const BlockVector& b) {
    BlockVector y = b;
    for (cplx& c : y.v) c /= (1.0 + eps);
    return y;
  };
  DenseMatrix w = dense_from_apply(n, [&](const cplx* in, cplx* out) {
    BlockVector b = BlockVector::zero(n, 1);
    std::copy(in, in + n, b.v.begin());
    BlockVector y = pseudo_apply(m, z, b, eps, 1.0);
    std::copy(y.v.begin(), y.v.end(), out);
  });
  double measured = approx_epsilon(hermitify(w, 1e-10), to_dense(m));
  CHECK(measured == doctest::Approx(3.0 * std::log1p(eps)).epsilon(1e-8));
  CHECK(measured <= 4.0 * eps);
}

TEST_CASE("pseudoinverse application on a singular system") {
  for (double eps : {0.1, 0.05}) {
    Rng rng(410 + static_cast<uint64_t>(eps * 100));
    std::vector<Block> frame;
    BlockSparseMatrix m = random_connection_laplacian(rng, 30, 2, 3, true, &frame);
    DenseHermitian md = to_dense(m);
    double mu = min_nonzero_eig(md);
    double kappa = condition_number(md);

    DenseHermitian shifted_inv = dense_inverse(to_dense(pad_identity(m, eps * mu)));
    SolverFn z = [&shifted_inv](const BlockVector& b) { return dh_apply(shifted_inv, b); };

    int nn = m.n * m.r;
    DenseMatrix w = dense_from_apply(nn, [&](const cplx* in, cplx* out) {
      BlockVector b = BlockVector::zero(m.n, m.r);
      std::copy(in, in + nn, b.v.begin());
      BlockVector y = pseudo_apply(m, z, b, eps, kappa);
      std::copy(y.v.begin(), y.v.end(), out);
    });
    double measured = approx_epsilon(hermitify(w, 1e-8), dense_pinv(md));
    CHECK(measured <= 4.0 * eps);

    // null vector in, zero out
    BlockVector v = BlockVector::zero(m.n, m.r);
    for (int i = 0; i < m.n; i++)
      for (int q = 0; q < m.r; q++) v.at(i)[q] = frame[static_cast<size_t>(i)].at(q, 0);
    BlockVector y = pseudo_apply(m, z, v, eps, kappa);
    CHECK(vec_norm(y) <= 1e-9 * vec_norm(v));
  }
}

TEST_CASE("pseudoinverse application rejects an unresolvable accuracy target") {
  BsmBuilder bld(4, 1);
  for (int i = 0; i < 4; i++) bld.add(i, i, Block::identity(1));
  BlockSparseMatrix m = bld.finish();
  SolverFn z = [](const BlockVector& b) { return b; };
  BlockVector b = BlockVector::zero(4, 1);
  b.v[0] = 1.0;

  CHECK_THROWS_AS(pseudo_apply(m, z, b, 0.01, 1e4), Error);
  try {
    pseudo_apply(m, z, b, 0.01, 1e4);
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::parameter);
  }
  CHECK_NOTHROW(pseudo_apply(m, z, b, 0.01, 100.0));
}

TEST_CASE("refinement with the exact inverse stops after one pass") {
  Rng rng(412);
  BlockSparseMatrix m = random_bdd(rng, 20, 2, 0.0);
  BlockVector b = random_vector(rng, m.n, m.r);
  SolverFn w = exact_dense_solver(m, 0.0);

  RefineResult res = refine(w, m, b, 1e-10, 40);
  CHECK(res.iterations == 1);
  REQUIRE(res.history.size() == 1);
  CHECK(res.history[0] <= 1e-10 * vec_norm(b));

  BlockVector check = matvec(m, res.x);
  vec_axpy(check, cplx(-1.0), b);
  CHECK(vec_norm(check) <= 1e-10 * vec_norm(b));
}

TEST_CASE("refinement with a half-strength inverse halves the residual each pass") {
  Rng rng(413);
  BlockSparseMatrix m = random_bdd(rng, 15, 1, 0.0);
  BlockVector b = random_vector(rng, m.n, m.r);
  DenseHermitian half = dh_scale(dense_inverse(to_dense(m)), 0.5);
  SolverFn w = [&half](const BlockVector& v) { return dh_apply(half, v); };

  RefineResult res = refine(w, m, b, 1e-6, 40);
  CHECK(res.iterations == 20);
  REQUIRE(res.history.size() == 20);
  double bn = vec_norm(b);
  for (size_t i = 0; i < res.history.size(); i++)
    CHECK(res.history[i] == doctest::Approx(bn * std::pow(0.5, static_cast<double>(i) + 1.0))
                                .epsilon(1e-9));
}

TEST_CASE("refinement driven by an elimination chain") {
  Rng rng(414);
  BlockSparseMatrix m = random_bdd(rng, 150, 2, 4.0);
  SchurComplementChain ch = exact_schur_chain(rng, m, 2, 4.0);
  SolverFn w = [&ch](const BlockVector& b) { return apply_chain(ch, b); };
  BlockVector b = random_vector(rng, m.n, m.r);

  RefineResult res = refine(w, m, b, 1e-8, 40);
  CHECK(res.iterations <= 40);
  for (size_t i = 1; i < res.history.size(); i++) CHECK(res.history[i] < res.history[i - 1]);
  BlockVector check = matvec(m, res.x);
  vec_axpy(check, cplx(-1.0), b);
  CHECK(vec_norm(check) <= 1e-8 * vec_norm(b));
}

TEST_CASE("refinement reports divergence") {
  Rng rng(415);
  BlockSparseMatrix m = random_bdd(rng, 10, 1, 0.0);
  BlockVector b = random_vector(rng, m.n, m.r);
  DenseHermitian neg = dh_scale(dense_inverse(to_dense(m)), -1.0);
  SolverFn w = [&neg](const BlockVector& v) { return dh_apply(neg, v); };

  CHECK_THROWS_AS(refine(w, m, b, 1e-8, 10), Error);
  try {
    refine(w, m, b, 1e-8, 10);
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::numerical);
  }
}

TEST_CASE("chain application rejects mismatched shapes") {
  Rng rng(416);
  BlockSparseMatrix m = random_bdd(rng, 10, 2, 0.0);
  SchurComplementChain ch;
  ch.n = m.n;
  ch.r = m.r;
  ch.terminal_m = m;
  ch.terminal = dense_factor(to_dense(m));
  BlockVector bad = random_vector(rng, m.n + 2, m.r);
  CHECK_THROWS_AS(apply_chain(ch, bad), Error);
}
