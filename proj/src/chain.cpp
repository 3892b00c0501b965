#include "bdd/chain.hpp"

#include <cmath>
#include <string>

#include "bdd/error.hpp"

namespace bdd {

namespace {

BlockVector gather(const BlockVector& x, const std::vector<int>& idx) {
  BlockVector out = BlockVector::zero(static_cast<int>(idx.size()), x.r);
  for (size_t p = 0; p < idx.size(); p++) {
    const cplx* src = x.at(idx[p]);
    cplx* dst = out.at(static_cast<int>(p));
    for (int q = 0; q < x.r; q++) dst[q] = src[q];
  }
  return out;
}

}  // namespace

BlockVector apply_chain(const SchurComplementChain& chain, const BlockVector& b) {
  require(b.n == chain.n && b.r == chain.r, ErrorKind::invalid_input,
          "apply_chain: vector shape does not match the chain");

  // Forward: partial solve on F, eliminate into the next level's right side.
  std::vector<BlockVector> xf_stack;
  xf_stack.reserve(chain.levels.size());
  BlockVector cur = b;
  for (const ChainLevel& lev : chain.levels) {
    require(cur.n == lev.m.n, ErrorKind::invalid_input,
            "apply_chain: level size mismatch (chain is inconsistent)");
    BlockVector bf = gather(cur, lev.f);
    BlockVector xf = jacobi_apply(lev.z, bf);
    BlockVector bc = gather(cur, lev.c);
    masked_matvec_add(lev.m, lev.c, lev.f, xf, bc, cplx(-1.0));
    xf_stack.push_back(std::move(xf));
    cur = std::move(bc);
  }

  require(cur.n == chain.terminal_m.n, ErrorKind::invalid_input,
          "apply_chain: terminal size mismatch");
  if (chain.terminal_m.n > 0) factor_solve(chain.terminal, cur.v.data());

  // Backward: correct each partial solve by the solution below it.
  for (int i = static_cast<int>(chain.levels.size()) - 1; i >= 0; i--) {
    const ChainLevel& lev = chain.levels[i];
    BlockVector& xf = xf_stack[static_cast<size_t>(i)];
    BlockVector t = BlockVector::zero(static_cast<int>(lev.f.size()), chain.r);
    masked_matvec_add(lev.m, lev.f, lev.c, cur, t, cplx(1.0));
    BlockVector corr = jacobi_apply(lev.z, t);
    BlockVector sol = BlockVector::zero(lev.m.n, chain.r);
    for (size_t p = 0; p < lev.f.size(); p++) {
      const cplx *a = xf.at(static_cast<int>(p)), *c = corr.at(static_cast<int>(p));
      cplx* dst = sol.at(lev.f[p]);
      for (int q = 0; q < chain.r; q++) dst[q] = a[q] - c[q];
    }
    for (size_t p = 0; p < lev.c.size(); p++) {
      const cplx* a = cur.at(static_cast<int>(p));
      cplx* dst = sol.at(lev.c[p]);
      for (int q = 0; q < chain.r; q++) dst[q] = a[q];
    }
    cur = std::move(sol);
  }
  return cur;
}

double chain_error_bound(const SchurComplementChain& chain) {
  double s = 0.0;
  for (const ChainLevel& lev : chain.levels) s += 2.0 * lev.epsilon;
  return s;
}

BlockVector solve_regularized(const BlockSparseMatrix& m, const BlockVector& b,
                              double epsilon, double mu,
                              const SolverFactory& make_solver) {
  require(m.hermitian, ErrorKind::precondition, "solve_regularized: matrix must be Hermitian");
  require(b.n == m.n && b.r == m.r, ErrorKind::invalid_input,
          "solve_regularized: vector shape does not match the matrix");
  require(epsilon > 0.0 && epsilon < 0.5, ErrorKind::parameter,
          "solve_regularized: epsilon must lie in (0, 1/2)");
  require(mu > 0.0 && std::isfinite(mu), ErrorKind::parameter,
          "solve_regularized: mu must be positive and finite");
  BlockSparseMatrix shifted = pad_identity(m, epsilon * mu);
  SolverFn z = make_solver(shifted, epsilon);
  return z(b);
}

BlockVector pseudo_apply(const BlockSparseMatrix& m, const SolverFn& z,
                         const BlockVector& b, double epsilon, double kappa) {
  require(b.n == m.n && b.r == m.r, ErrorKind::invalid_input,
          "pseudo_apply: vector shape does not match the matrix");
  require(epsilon > 0.0 && epsilon < 0.5, ErrorKind::parameter,
          "pseudo_apply: epsilon must lie in (0, 1/2)");
  require(kappa >= 1.0 && std::isfinite(kappa), ErrorKind::parameter,
          "pseudo_apply: kappa must be a finite condition number >= 1");
  // The inner solver has to track the shifted inverse to delta for the cubed
  // operator to stay within 4 epsilon of the pseudoinverse; below 1e-12 that
  // target is not resolvable in double precision.
  double delta = epsilon / (56.0 * kappa * kappa * kappa);
  require(delta >= 1e-12, ErrorKind::parameter,
          "pseudo_apply: required inner accuracy is below 1e-12 "
          "(epsilon too small or kappa too large)");
  BlockVector t = matvec(m, b);
  t = z(t);
  t = z(t);
  t = z(t);
  return matvec(m, t);
}

RefineResult refine(const SolverFn& w, const BlockSparseMatrix& m,
                    const BlockVector& b, double tol, int max_iters) {
  require(b.n == m.n && b.r == m.r, ErrorKind::invalid_input,
          "refine: vector shape does not match the matrix");
  require(tol > 0.0, ErrorKind::parameter, "refine: tolerance must be positive");
  require(max_iters >= 1, ErrorKind::parameter, "refine: need at least one iteration");

  RefineResult out;
  out.x = BlockVector::zero(m.n, m.r);
  double bn = vec_norm(b);
  if (bn == 0.0) return out;

  for (int it = 0; it < max_iters; it++) {
    BlockVector res = matvec(m, out.x);
    vec_axpy(res, cplx(-1.0), b);  // res = Mx - b
    double rn = vec_norm(res);
    if (it > 0) out.history.push_back(rn);
    if (rn <= tol * bn) return out;
    BlockVector step = w(res);
    vec_axpy(out.x, cplx(-1.0), step);  // x -= W(Mx - b)
    out.iterations++;
  }
  BlockVector res = matvec(m, out.x);
  vec_axpy(res, cplx(-1.0), b);
  double rn = vec_norm(res);
  out.history.push_back(rn);
  if (rn <= tol * bn) return out;
  fail(ErrorKind::numerical,
       "refine: residual " + std::to_string(rn / bn) + " after " +
           std::to_string(max_iters) + " iterations (preconditioner too weak)");
}

}  // namespace bdd
