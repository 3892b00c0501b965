#include "bdd/builder.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <utility>

#include "bdd/error.hpp"
#include "bdd/resparsify.hpp"
#include "bdd/rng.hpp"
#include "bdd/schur.hpp"
#include "bdd/subset.hpp"

namespace bdd {

double builder_epsilon(int i) {
  return 1.0 / ((i + 8.0) * (i + 8.0));
}

double decompose_epsilon(int i) {
  return 1.0 / (8.0 * (i + 2.0) * (i + 2.0));
}

int builder_undersampling(const BuilderParams& p, int phase) {
  require(phase >= 1, ErrorKind::parameter,
          "builder_undersampling: phases are numbered from 1");
  double lg = std::log2(static_cast<double>(phase - 1) * p.k + 1.0);
  double expo = 2.0 * p.c * p.k * lg * lg;
  if (expo >= std::log2(static_cast<double>(p.k_cap))) return p.k_cap;
  return std::max(1, static_cast<int>(std::llround(std::exp2(expo))));
}

namespace {

constexpr int kMaxLevels = 64;
constexpr int kMaxSparsifyDepth = 8;

void validate_build(const BlockSparseMatrix& m0, const BuilderParams& p,
                    const char* who) {
  require(m0.hermitian && m0.n >= 1, ErrorKind::precondition,
          std::string(who) + ": input must be a nonempty Hermitian block matrix");
  require(is_bdd(m0), ErrorKind::precondition,
          std::string(who) + ": input must be bDD");
  require(p.k >= 1 && p.k_cap >= 1 && p.terminal_size >= 1, ErrorKind::parameter,
          std::string(who) + ": k, k_cap and terminal_size must be positive");
  require(p.c > 0.0 && std::isfinite(p.c), ErrorKind::parameter,
          std::string(who) + ": schedule constant c must be positive");
  require(p.alpha >= 4.0 && std::isfinite(p.alpha), ErrorKind::parameter,
          std::string(who) + ": alpha must be at least 4");
  require(p.trigger_ratio > 0.0, ErrorKind::parameter,
          std::string(who) + ": trigger ratio must be positive");
}

bool needs_resample(const BlockSparseMatrix& m, double ratio) {
  if (m.n < 2) return false;
  double per_row = static_cast<double>(m.nnz_blocks()) / m.n;
  return per_row > ratio * std::log2(static_cast<double>(m.n));
}

// Elimination trades rows for clique fill, and on expander-like inputs the
// intermediate matrices densify long before the resampler can thin them:
// Bernoulli keep probabilities saturate at 1 until the row count is far
// beyond anything a desk machine holds. Once another elimination would cost
// more than finishing directly, fold the remainder into the dense terminal
// factor. The factor is exact, so chain quality only improves; the terminal
// just ends up larger than the requested target.
bool dense_enough_to_stop(const BlockSparseMatrix& m) {
  long long nr = static_cast<long long>(m.n) * m.r;
  if (nr <= 600 || nr > kDenseCap) return false;
  double per_row = static_cast<double>(m.nnz_blocks()) / m.n;
  return per_row > std::max(12.0, static_cast<double>(nr) / 200.0);
}

std::vector<int> complement_of(const std::vector<int>& f, int n) {
  std::vector<int> c;
  c.reserve(n - static_cast<int>(f.size()));
  size_t p = 0;
  for (int i = 0; i < n; i++) {
    if (p < f.size() && f[p] == i) {
      p++;
    } else {
      c.push_back(i);
    }
  }
  return c;
}

SchurComplementChain construct_impl(const BlockSparseMatrix& m0,
                                    const BuilderParams& p,
                                    bool allow_first_resample, int depth);

// Inner solves for the resampler come from a chain built on the sampled
// matrix. When the sample is no smaller than its parent (the undersampling
// factor was 1), the nested build must not resample again at entry or the
// recursion would never bottom out.
InnerSolverFactory chain_factory(const BuilderParams& p, int parent_nnz,
                                 int depth, uint64_t seed) {
  return [p, parent_nnz, depth, seed](const BlockSparseMatrix& inner) -> SolverApply {
    BuilderParams q = p;
    q.seed = seed;
    bool allow = inner.nnz_blocks() < parent_nnz;
    auto sub = std::make_shared<SchurComplementChain>(
        construct_impl(inner, q, allow, depth + 1));
    return [sub](const BlockVector& b) { return apply_chain(*sub, b); };
  };
}

SchurComplementChain construct_impl(const BlockSparseMatrix& m0,
                                    const BuilderParams& p,
                                    bool allow_first_resample, int depth) {
  require(depth <= kMaxSparsifyDepth, ErrorKind::improbable,
          "recursive_construct: resampler recursion exceeded " +
              std::to_string(kMaxSparsifyDepth) + " nested builds");
  SchurComplementChain chain;
  chain.n = m0.n;
  chain.r = m0.r;
  int terminal = std::min(p.terminal_size, kDenseCap / m0.r);
  Rng root(p.seed);
  BlockSparseMatrix cur = m0;
  std::vector<int> alive(static_cast<size_t>(m0.n));
  std::iota(alive.begin(), alive.end(), 0);
  double pending = 0.0;  // accuracy spent before the first level exists
  int i = 0;
  while (cur.n > terminal && !dense_enough_to_stop(cur)) {
    require(static_cast<int>(chain.levels.size()) < kMaxLevels,
            ErrorKind::improbable,
            "recursive_construct: " + std::to_string(kMaxLevels) +
                " levels built and " + std::to_string(cur.n) +
                " rows remain; the subset selector is shrinking too slowly");
    double eps = builder_epsilon(i);
    try {
      if (i % p.k == 0 && (i > 0 || allow_first_resample) &&
          needs_resample(cur, p.trigger_ratio)) {
        int kk = builder_undersampling(p, i / p.k + 1);
        Rng rs = root.split(9000 + static_cast<uint64_t>(i));
        uint64_t inner_seed = rs.next_u64();
        uint64_t sample_seed = rs.next_u64();
        cur = sparsify(cur, eps, kk,
                       chain_factory(p, cur.nnz_blocks(), depth, inner_seed),
                       sample_seed);
        if (chain.levels.empty()) {
          pending += eps;
        } else {
          chain.levels.back().epsilon += eps;
        }
      }
      Rng it = root.split(static_cast<uint64_t>(i));
      SubsetResult sel = bdd_subset(cur, p.alpha, it.next_u64());
      std::vector<int> c = complement_of(sel.f, cur.n);
      ChainLevel lev;
      lev.z = make_jacobi(submatrix(cur, sel.f, sel.f), eps);
      lev.f = sel.f;
      lev.c = c;
      lev.f_global.reserve(sel.f.size());
      for (int t : sel.f) lev.f_global.push_back(alive[static_cast<size_t>(t)]);
      lev.c_global.reserve(c.size());
      for (int t : c) lev.c_global.push_back(alive[static_cast<size_t>(t)]);
      lev.epsilon = eps + pending;
      pending = 0.0;
      BlockSparseMatrix next = approx_schur(cur, sel.f, p.alpha, eps, it.next_u64());
      lev.m = std::move(cur);
      chain.levels.push_back(std::move(lev));
      std::vector<int> alive2;
      alive2.reserve(c.size());
      for (int t : c) alive2.push_back(alive[static_cast<size_t>(t)]);
      alive.swap(alive2);
      cur = std::move(next);
    } catch (const Error& e) {
      throw Error(e.kind(),
                  "level " + std::to_string(i) + " (n=" + std::to_string(cur.n) +
                      "): " + e.what());
    }
    i++;
  }
  chain.terminal_m = std::move(cur);
  chain.terminal = dense_factor(to_dense(chain.terminal_m));
  return chain;
}

// y += s * m x for a rectangular slice (x indexed by column position)
void rect_matvec_add(const BlockSparseMatrix& m, const BlockVector& x,
                     BlockVector& y, cplx s) {
  const int r = m.r;
  for (int i = 0; i < m.n; i++) {
    cplx* yi = y.at(i);
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      const cplx* blk = m.block_data(k);
      const cplx* xj = x.at(m.col[k]);
      for (int a = 0; a < r; a++) {
        cplx t = 0.0;
        for (int b = 0; b < r; b++) t += blk[a * r + b] * xj[b];
        yi[a] += s * t;
      }
    }
  }
}

// y += s * m^* x for a rectangular slice (x indexed by row position)
void rect_matvec_adj_add(const BlockSparseMatrix& m, const BlockVector& x,
                         BlockVector& y, cplx s) {
  const int r = m.r;
  for (int i = 0; i < m.n; i++) {
    const cplx* xi = x.at(i);
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      const cplx* blk = m.block_data(k);
      cplx* yj = y.at(m.col[k]);
      for (int a = 0; a < r; a++) {
        cplx t = 0.0;
        for (int b = 0; b < r; b++) t += std::conj(blk[b * r + a]) * xi[b];
        yj[a] += s * t;
      }
    }
  }
}

BlockVector gather(const BlockVector& x, const std::vector<int>& idx, int r) {
  BlockVector out = BlockVector::zero(static_cast<int>(idx.size()), r);
  for (size_t p = 0; p < idx.size(); p++) {
    const cplx* src = x.at(idx[p]);
    cplx* dst = out.at(static_cast<int>(p));
    for (int q = 0; q < r; q++) dst[q] = src[q];
  }
  return out;
}

// unpivoted upper Cholesky factor R with R^* R = m; stability needs no
// pivoting since the input is positive definite
DenseMatrix upper_cholesky(const DenseHermitian& m) {
  int N = m.N;
  DenseMatrix w(N, N);
  for (int i = 0; i < N; i++)
    for (int j = i; j < N; j++) w.at(i, j) = m.at(i, j);
  DenseMatrix r(N, N);
  for (int k = 0; k < N; k++) {
    double d2 = w.at(k, k).real();
    require(d2 > 0.0, ErrorKind::numerical,
            "decompose: terminal matrix is not positive definite (pad the "
            "input if it is singular)");
    double d = std::sqrt(d2);
    r.at(k, k) = d;
    for (int j = k + 1; j < N; j++) r.at(k, j) = w.at(k, j) / d;
    for (int i = k + 1; i < N; i++) {
      cplx rki = r.at(k, i);
      if (rki == cplx(0.0)) continue;
      for (int j = i; j < N; j++)
        w.at(i, j) -= std::conj(rki) * r.at(k, j);
    }
  }
  return r;
}

// in place solve of R^* y = x (forward) for upper triangular R
void trisolve_adj(const DenseMatrix& r, cplx* x) {
  int N = r.rows;
  for (int i = 0; i < N; i++) {
    cplx s = x[i];
    for (int k = 0; k < i; k++) s -= std::conj(r.at(k, i)) * x[k];
    x[i] = s / std::conj(r.at(i, i));
  }
}

// in place solve of R y = x (backward) for upper triangular R
void trisolve(const DenseMatrix& r, cplx* x) {
  int N = r.rows;
  for (int i = N - 1; i >= 0; i--) {
    cplx s = x[i];
    for (int k = i + 1; k < N; k++) s -= r.at(i, k) * x[k];
    x[i] = s / r.at(i, i);
  }
}

}  // namespace

SchurComplementChain recursive_construct(const BlockSparseMatrix& m0,
                                         const BuilderParams& params) {
  validate_build(m0, params, "recursive_construct");
  return construct_impl(m0, params, true, 0);
}

UDUFactorization decompose(const BlockSparseMatrix& m0,
                           const BuilderParams& params) {
  validate_build(m0, params, "decompose");
  UDUFactorization out;
  out.n = m0.n;
  out.r = m0.r;
  int terminal = std::min(params.terminal_size, kDenseCap / m0.r);
  Rng root(params.seed);
  BlockSparseMatrix cur = m0;
  std::vector<int> alive(static_cast<size_t>(m0.n));
  std::iota(alive.begin(), alive.end(), 0);
  int i = 1;
  while (cur.n > terminal && !dense_enough_to_stop(cur)) {
    require(static_cast<int>(out.levels.size()) < kMaxLevels,
            ErrorKind::improbable,
            "decompose: " + std::to_string(kMaxLevels) +
                " levels built and " + std::to_string(cur.n) +
                " rows remain; the subset selector is shrinking too slowly");
    double eps = decompose_epsilon(i);
    try {
      // the level budget is shared between resampling and the complement
      if (needs_resample(cur, params.trigger_ratio)) {
        int kk = builder_undersampling(params, (i - 1) / params.k + 1);
        Rng rs = root.split(9000 + static_cast<uint64_t>(i));
        uint64_t inner_seed = rs.next_u64();
        uint64_t sample_seed = rs.next_u64();
        cur = sparsify(cur, 0.5 * eps, kk,
                       chain_factory(params, cur.nnz_blocks(), 0, inner_seed),
                       sample_seed);
      }
      Rng it = root.split(static_cast<uint64_t>(i));
      SubsetResult sel = bdd_subset_low_degree(cur, params.alpha, it.next_u64());
      std::vector<int> c = complement_of(sel.f, cur.n);
      UDULevel lev;
      lev.z = make_jacobi(submatrix(cur, sel.f, sel.f), eps);
      lev.m_fc = submatrix(cur, sel.f, c);
      lev.f = sel.f;
      lev.c = c;
      lev.epsilon = eps;
      for (int t : sel.f) out.perm.push_back(alive[static_cast<size_t>(t)]);
      BlockSparseMatrix next =
          approx_schur(cur, sel.f, params.alpha, 0.5 * eps, it.next_u64());
      out.levels.push_back(std::move(lev));
      std::vector<int> alive2;
      alive2.reserve(c.size());
      for (int t : c) alive2.push_back(alive[static_cast<size_t>(t)]);
      alive.swap(alive2);
      cur = std::move(next);
    } catch (const Error& e) {
      throw Error(e.kind(),
                  "level " + std::to_string(i) + " (n=" + std::to_string(cur.n) +
                      "): " + e.what());
    }
    i++;
  }
  for (int t : alive) out.perm.push_back(t);
  out.terminal_m = std::move(cur);
  out.terminal_u = upper_cholesky(to_dense(out.terminal_m));
  return out;
}

BlockVector udu_solve(const UDUFactorization& f, const BlockVector& b) {
  require(b.n == f.n && b.r == f.r, ErrorKind::invalid_input,
          "udu_solve: vector shape does not match the factorization");
  const int r = f.r;

  // Forward: peel the right side down the levels. The adjoint factor has
  // identity on each F block, so the F share passes through unchanged and
  // only the carried tail is corrected.
  std::vector<BlockVector> bf_stack;
  bf_stack.reserve(f.levels.size());
  BlockVector cur = b;
  for (const UDULevel& lev : f.levels) {
    require(cur.n == static_cast<int>(lev.f.size() + lev.c.size()),
            ErrorKind::invalid_input, "udu_solve: level size mismatch");
    BlockVector bf = gather(cur, lev.f, r);
    BlockVector zb = jacobi_apply(lev.z, bf);
    BlockVector bc = gather(cur, lev.c, r);
    rect_matvec_adj_add(lev.m_fc, zb, bc, cplx(-1.0));
    bf_stack.push_back(std::move(bf));
    cur = std::move(bc);
  }

  // Terminal corner: D is the identity there, U holds the Cholesky factor.
  require(cur.n == f.terminal_m.n, ErrorKind::invalid_input,
          "udu_solve: terminal size mismatch");
  if (cur.n > 0) {
    trisolve_adj(f.terminal_u, cur.v.data());
    trisolve(f.terminal_u, cur.v.data());
  }

  // Backward: block-diagonal solve on each F share, then subtract the
  // coupling applied to the already-solved tail.
  for (int i = static_cast<int>(f.levels.size()) - 1; i >= 0; i--) {
    const UDULevel& lev = f.levels[static_cast<size_t>(i)];
    BlockVector& bf = bf_stack[static_cast<size_t>(i)];
    for (size_t p = 0; p < lev.f.size(); p++)
      cholesky_solve(lev.z.xfac[p], bf.at(static_cast<int>(p)));
    BlockVector t = BlockVector::zero(static_cast<int>(lev.f.size()), r);
    rect_matvec_add(lev.m_fc, cur, t, cplx(1.0));
    BlockVector corr = jacobi_apply(lev.z, t);
    BlockVector sol = BlockVector::zero(static_cast<int>(lev.f.size() + lev.c.size()), r);
    for (size_t p = 0; p < lev.f.size(); p++) {
      const cplx *a = bf.at(static_cast<int>(p)), *cc = corr.at(static_cast<int>(p));
      cplx* dst = sol.at(lev.f[p]);
      for (int q = 0; q < r; q++) dst[q] = a[q] - cc[q];
    }
    for (size_t p = 0; p < lev.c.size(); p++) {
      const cplx* a = cur.at(static_cast<int>(p));
      cplx* dst = sol.at(lev.c[p]);
      for (int q = 0; q < r; q++) dst[q] = a[q];
    }
    cur = std::move(sol);
  }
  return cur;
}

namespace {

// final position of every local index, per level, in the elimination order
std::vector<std::vector<int>> level_slots(const UDUFactorization& f) {
  size_t d = f.levels.size();
  std::vector<int> base(d + 1, 0);
  for (size_t i = 0; i < d; i++)
    base[i + 1] = base[i] + static_cast<int>(f.levels[i].f.size());
  std::vector<std::vector<int>> slots(d + 1);
  slots[d].resize(static_cast<size_t>(f.terminal_m.n));
  for (int q = 0; q < f.terminal_m.n; q++)
    slots[d][static_cast<size_t>(q)] = base[d] + q;
  for (size_t i = d; i-- > 0;) {
    const UDULevel& lev = f.levels[i];
    slots[i].resize(lev.f.size() + lev.c.size());
    for (size_t p = 0; p < lev.f.size(); p++)
      slots[i][static_cast<size_t>(lev.f[p])] = base[i] + static_cast<int>(p);
    for (size_t q = 0; q < lev.c.size(); q++)
      slots[i][static_cast<size_t>(lev.c[q])] = slots[i + 1][q];
  }
  return slots;
}

}  // namespace

DenseMatrix udu_dense_u(const UDUFactorization& f) {
  int N = f.n * f.r;
  require(N <= kDenseCap, ErrorKind::size_cap,
          "udu_dense_u: materialization is capped at " +
              std::to_string(kDenseCap) + " rows");
  const int r = f.r;
  std::vector<std::vector<int>> slots = level_slots(f);
  DenseMatrix u(N, N);
  for (int t = 0; t < N; t++) u.at(t, t) = 1.0;
  for (size_t i = 0; i < f.levels.size(); i++) {
    const UDULevel& lev = f.levels[i];
    int nf = static_cast<int>(lev.f.size());
    int nc = static_cast<int>(lev.c.size());
    // one polynomial solve per scalar column of the coupling slice
    for (int q = 0; q < nc; q++) {
      for (int a = 0; a < r; a++) {
        BlockVector col = BlockVector::zero(nf, r);
        bool any = false;
        for (int p = 0; p < nf; p++) {
          int k = lev.m_fc.find(p, q);
          if (k < 0) continue;
          const cplx* blk = lev.m_fc.block_data(k);
          cplx* dst = col.at(p);
          for (int row = 0; row < r; row++) dst[row] = blk[row * r + a];
          any = true;
        }
        if (!any) continue;
        BlockVector zc = jacobi_apply(lev.z, col);
        int cslot = slots[i][static_cast<size_t>(lev.c[q])];
        for (int p = 0; p < nf; p++) {
          int fslot = slots[i][static_cast<size_t>(lev.f[p])];
          for (int row = 0; row < r; row++)
            u.at(fslot * r + row, cslot * r + a) = zc.at(p)[row];
        }
      }
    }
  }
  // present the terminal corner in unit-diagonal form; the row weights of
  // the Cholesky factor reappear squared in the dense D, so the product
  // U^* D U is unchanged
  int off = (f.n - f.terminal_m.n) * r;
  for (int a = 0; a < f.terminal_m.n * r; a++) {
    cplx daa = f.terminal_u.at(a, a);
    for (int b = a + 1; b < f.terminal_m.n * r; b++)
      u.at(off + a, off + b) = f.terminal_u.at(a, b) / daa;
  }
  return u;
}

DenseMatrix udu_dense_d(const UDUFactorization& f) {
  int N = f.n * f.r;
  require(N <= kDenseCap, ErrorKind::size_cap,
          "udu_dense_d: materialization is capped at " +
              std::to_string(kDenseCap) + " rows");
  const int r = f.r;
  DenseMatrix d(N, N);
  int off = 0;
  for (const UDULevel& lev : f.levels) {
    for (size_t p = 0; p < lev.f.size(); p++) {
      Block x = lev.z.x.get(static_cast<int>(p));
      for (int a = 0; a < r; a++)
        for (int b = 0; b < r; b++)
          d.at((off + static_cast<int>(p)) * r + a,
               (off + static_cast<int>(p)) * r + b) = x.a[static_cast<size_t>(a) * r + b];
    }
    off += static_cast<int>(lev.f.size());
  }
  for (int t = off * r; t < N; t++) {
    double w = f.terminal_u.at(t - off * r, t - off * r).real();
    d.at(t, t) = w * w;
  }
  return d;
}

long long udu_stored_blocks(const UDUFactorization& f) {
  long long total = 0;
  for (const UDULevel& lev : f.levels) {
    total += lev.m_fc.nnz_blocks();
    total += lev.z.l.nnz_blocks();
    total += static_cast<long long>(lev.f.size());  // the X factor
  }
  long long t = f.terminal_m.n;
  total += t * (t + 1) / 2;
  return total;
}

}  // namespace bdd
