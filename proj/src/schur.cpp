#include "bdd/schur.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "bdd/clique.hpp"
#include "bdd/error.hpp"

namespace bdd {

namespace {

struct Split {
  std::vector<int> f, c;   // ascending
  std::vector<char> in_f;  // size n
  std::vector<int> cpos;   // global index -> position in c, or -1
};

Split make_split(int n, const std::vector<int>& f) {
  Split s;
  s.f = f;
  std::sort(s.f.begin(), s.f.end());
  require(!s.f.empty(), ErrorKind::invalid_input, "schur: empty elimination set");
  require(std::adjacent_find(s.f.begin(), s.f.end()) == s.f.end(),
          ErrorKind::invalid_input, "schur: duplicate index in elimination set");
  require(s.f.front() >= 0 && s.f.back() < n, ErrorKind::invalid_input,
          "schur: elimination index out of range");
  s.in_f.assign(n, 0);
  for (int i : s.f) s.in_f[i] = 1;
  s.cpos.assign(n, -1);
  for (int i = 0; i < n; i++)
    if (!s.in_f[i]) {
      s.cpos[i] = static_cast<int>(s.c.size());
      s.c.push_back(i);
    }
  require(!s.c.empty(), ErrorKind::invalid_input,
          "schur: elimination set covers the whole matrix");
  return s;
}

// entries (i, M[i,j] w) for stored i != j in column j, ascending in i; block
// row j holds M[j,i], so the column entry is its adjoint
std::vector<std::pair<int, Block>> scaled_column(const BlockSparseMatrix& m, int j,
                                                 const Block& w) {
  std::vector<std::pair<int, Block>> out;
  for (int k = m.row_ptr[j]; k < m.row_ptr[j + 1]; k++) {
    int i = m.col[k];
    if (i == j) continue;
    out.emplace_back(i, mul(adjoint(m.block_at(k)), w));
  }
  return out;
}

void accumulate(BsmBuilder& bld, const BlockSparseMatrix& g, double scale) {
  for (int i = 0; i < g.n; i++)
    for (int k = g.row_ptr[i]; k < g.row_ptr[i + 1]; k++)
      bld.add(i, g.col[k], g.block_at(k) * cplx(scale));
}

}  // namespace

SchurParams make_schur_params(double alpha, double epsilon) {
  require(std::isfinite(alpha) && alpha >= 4.0, ErrorKind::parameter,
          "schur params: dominance must be at least 4");
  require(std::isfinite(epsilon) && epsilon > 0.0 && epsilon < 0.5,
          ErrorKind::parameter, "schur params: accuracy must lie in (0, 1/2)");
  SchurParams p;
  p.alpha = alpha;
  p.epsilon = epsilon;
  // rounds needed for alpha_k = 2 (alpha/2)^(2^k) to pass 4/epsilon; the tiny
  // slack keeps integer-valued logs from rounding up through fp noise
  double need = std::log(4.0 / epsilon) / std::log(0.5 * alpha);
  p.d_iters = std::max(1, static_cast<int>(std::ceil(2.0 * std::log2(need) - 1e-9)));
  return p;
}

BlockSparseMatrix schur_square(const BlockSparseMatrix& m, const std::vector<int>& f,
                               double epsilon, uint64_t seed) {
  require(m.hermitian, ErrorKind::invalid_input, "schur_square: matrix must be Hermitian");
  require(std::isfinite(epsilon) && epsilon > 0.0 && epsilon < 0.5,
          ErrorKind::parameter, "schur_square: accuracy must lie in (0, 1/2)");
  Split s = make_split(m.n, f);
  require(is_bdd(m), ErrorKind::precondition, "schur_square: matrix must be bDD");
  require(is_alpha_bdd(submatrix(m, s.f, s.f), 4.0), ErrorKind::precondition,
          "schur_square: eliminated corner must be 4-bDD");

  const int n = m.n, r = m.r;
  BsmBuilder bld(n, r);

  // pass-through part: half the f diagonal, half the cross blocks, the kept
  // corner verbatim; the f off-diagonal is consumed by the cliques below
  for (int i = 0; i < n; i++)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      int j = m.col[k];
      if (s.in_f[i] && s.in_f[j]) {
        if (i == j) bld.add(i, i, m.block_at(k) * cplx(0.5));
      } else if (s.in_f[i] || s.in_f[j]) {
        bld.add(i, j, m.block_at(k) * cplx(0.5));
      } else {
        bld.add(i, j, m.block_at(k));
      }
    }

  // per eliminated column j, demand g_i = -M[i,j] D_jj^{-1/2} feeds a clique
  // over the f-side neighbors, one over the kept neighbors, and a bipartite
  // clique between the sides, each at weight 1/2. The diagonal correction
  // removes exactly what the clique diagonals overcount relative to one step
  // of elimination: beta_i (sum_k beta_k - beta_i) I + g_i g_i^* per column,
  // where beta are the demand norms. With exact cliques the output's Schur
  // complement onto the kept set equals the input's identically.
  std::vector<double> corr_sc(n, 0.0);
  std::vector<Block> corr_gram(n, Block(r));

  for (int j : s.f) {
    Block dm12 = psd_inv_sqrt(m.diag(j));
    auto col = scaled_column(m, j, dm12);
    for (auto& ib : col) ib.second *= cplx(-1.0);
    if (col.empty()) continue;

    double total = 0.0;
    std::vector<double> beta(col.size());
    for (size_t e = 0; e < col.size(); e++) {
      beta[e] = block_op_norm(col[e].second);
      total += beta[e];
    }
    std::vector<std::pair<int, Block>> df, dc;
    for (size_t e = 0; e < col.size(); e++) {
      int i = col[e].first;
      corr_sc[i] += beta[e] * (total - beta[e]);
      corr_gram[i] += mul_adj(col[e].second, col[e].second);
      (s.in_f[i] ? df : dc).push_back(col[e]);
    }

    const size_t nf = df.size(), nk = dc.size();
    if (nf >= 2)
      accumulate(bld,
                 clique_sparsification(make_demand(n, r, std::move(df)), epsilon, seed),
                 0.5);
    if (nk >= 2)
      accumulate(bld,
                 clique_sparsification(make_demand(n, r, std::move(dc)), epsilon, seed),
                 0.5);
    if (nf >= 1 && nk >= 1)
      accumulate(bld,
                 bipartite_clique_sparsification(make_demand(n, r, std::move(col)), s.f,
                                                 epsilon, seed),
                 0.5);
  }

  for (int i = 0; i < n; i++) {
    if (corr_sc[i] == 0.0 && is_zero(corr_gram[i])) continue;
    Block corr = Block::identity(r, corr_sc[i]);
    corr += corr_gram[i];
    bld.add(i, i, corr * cplx(-0.5));
  }
  return bld.finish();
}

BlockSparseMatrix last_step(const BlockSparseMatrix& m, const std::vector<int>& f,
                            double alpha, double epsilon, uint64_t seed) {
  require(m.hermitian, ErrorKind::invalid_input, "last_step: matrix must be Hermitian");
  require(std::isfinite(alpha) && alpha >= 4.0, ErrorKind::parameter,
          "last_step: dominance must be at least 4");
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter,
          "last_step: accuracy must be positive");
  Split s = make_split(m.n, f);
  require(is_bdd(m), ErrorKind::precondition, "last_step: matrix must be bDD");
  require(is_alpha_bdd(submatrix(m, s.f, s.f), alpha), ErrorKind::precondition,
          "last_step: eliminated corner must meet the requested dominance");

  const int n = m.n, r = m.r;
  const double xs = alpha / (alpha + 1.0);
  const double half_eps = 0.5 * epsilon;

  std::vector<Block> xm12(s.f.size(), Block(r));
  for (size_t t = 0; t < s.f.size(); t++)
    xm12[t] = psd_inv_sqrt(m.diag(s.f[t]) * cplx(xs));

  // first stage: build the smoothed matrix. Its Schur complement onto the
  // kept set sits between the true one and 1 + 2/alpha times it, and its
  // eliminated corner is block diagonal, so the second stage can finish by
  // exact elimination. The pass-through part keeps X/2 on the f diagonal,
  // scales the cross blocks by (1 - 1/alpha)/2, and copies the kept corner.
  BsmBuilder rbld(n, r);
  const double cross = 0.5 * (1.0 - 1.0 / alpha);
  for (int i = 0; i < n; i++)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      int j = m.col[k];
      if (s.in_f[i] && s.in_f[j]) {
        if (i == j) rbld.add(i, i, m.block_at(k) * cplx(0.5 * xs));
      } else if (s.in_f[i] || s.in_f[j]) {
        rbld.add(i, j, m.block_at(k) * cplx(cross));
      } else {
        rbld.add(i, j, m.block_at(k));
      }
    }

  std::vector<double> corr_sc(n, 0.0);
  std::vector<Block> corr_gram(n, Block(r));

  for (size_t t = 0; t < s.f.size(); t++) {
    int j = s.f[t];
    // uniform sign M[i,j] X_jj^{-1/2} on both sides; a global sign per column
    // leaves both product and bipartite clique Laplacians unchanged
    auto col = scaled_column(m, j, xm12[t]);
    if (col.empty()) continue;

    double tot_f = 0.0, tot_c = 0.0;
    std::vector<double> beta(col.size());
    for (size_t e = 0; e < col.size(); e++) {
      beta[e] = block_op_norm(col[e].second);
      (s.in_f[col[e].first] ? tot_f : tot_c) += beta[e];
    }
    std::vector<std::pair<int, Block>> gc;
    for (size_t e = 0; e < col.size(); e++) {
      int i = col[e].first;
      if (s.in_f[i]) {
        corr_sc[i] += beta[e] * tot_c;
      } else {
        corr_sc[i] += beta[e] * (tot_c - beta[e]) + beta[e] * tot_f;
        corr_gram[i] += mul_adj(col[e].second, col[e].second);
        gc.push_back(col[e]);
      }
    }
    const size_t nk = gc.size(), nf = col.size() - nk;
    if (nk >= 2)
      accumulate(rbld,
                 clique_sparsification(make_demand(n, r, std::move(gc)), half_eps, seed),
                 0.5);
    if (nf >= 1 && nk >= 1)
      accumulate(rbld,
                 bipartite_clique_sparsification(make_demand(n, r, std::move(col)), s.f,
                                                 half_eps, seed),
                 0.5);
  }

  for (int i = 0; i < n; i++) {
    if (corr_sc[i] == 0.0 && is_zero(corr_gram[i])) continue;
    Block corr = Block::identity(r, corr_sc[i]);
    corr += corr_gram[i];
    rbld.add(i, i, corr * cplx(-0.5));
  }
  BlockSparseMatrix rm = rbld.finish();

  // the bipartite sparsifier touches the f side only on the diagonal, so any
  // surviving off-diagonal block inside the corner is a construction bug
  for (int j : s.f)
    for (int k = rm.row_ptr[j]; k < rm.row_ptr[j + 1]; k++)
      require(rm.col[k] == j || !s.in_f[rm.col[k]], ErrorKind::numerical,
              "last_step: smoothed corner is not block diagonal");

  // second stage: eliminate the block diagonal corner exactly through one
  // clique per column at budget epsilon/2, with the same diagonal
  // bookkeeping as above (full weight here, no halving)
  const int nc = static_cast<int>(s.c.size());
  BsmBuilder sbld(nc, r);
  for (int i : s.c)
    for (int k = rm.row_ptr[i]; k < rm.row_ptr[i + 1]; k++) {
      int j = rm.col[k];
      if (!s.in_f[j]) sbld.add(s.cpos[i], s.cpos[j], rm.block_at(k));
    }

  std::vector<double> el_sc(nc, 0.0);
  std::vector<Block> el_gram(nc, Block(r));
  for (int j : s.f) {
    Block rm12 = psd_inv_sqrt(rm.diag(j));
    auto col = scaled_column(rm, j, rm12);
    if (col.empty()) continue;
    double total = 0.0;
    std::vector<double> beta(col.size());
    for (size_t e = 0; e < col.size(); e++) {
      beta[e] = block_op_norm(col[e].second);
      total += beta[e];
    }
    std::vector<std::pair<int, Block>> rd;
    rd.reserve(col.size());
    for (size_t e = 0; e < col.size(); e++) {
      int p = s.cpos[col[e].first];
      el_sc[p] += beta[e] * (total - beta[e]);
      el_gram[p] += mul_adj(col[e].second, col[e].second);
      rd.emplace_back(p, std::move(col[e].second));
    }
    if (rd.size() >= 2)
      accumulate(sbld,
                 clique_sparsification(make_demand(nc, r, std::move(rd)), half_eps, seed),
                 1.0);
  }
  for (int p = 0; p < nc; p++) {
    if (el_sc[p] == 0.0 && is_zero(el_gram[p])) continue;
    Block corr = Block::identity(r, el_sc[p]);
    corr += el_gram[p];
    sbld.add(p, p, corr * cplx(-1.0));
  }
  return sbld.finish();
}

BlockSparseMatrix approx_schur(const BlockSparseMatrix& m, const std::vector<int>& f,
                               double alpha, double epsilon, uint64_t seed) {
  SchurParams p = make_schur_params(alpha, epsilon);
  if (alpha >= 4.0 / epsilon) return last_step(m, f, alpha, 0.25 * epsilon, seed);
  BlockSparseMatrix cur = m;
  double per = epsilon / (2.0 * p.d_iters);
  for (int it = 0; it < p.d_iters; it++) cur = schur_square(cur, f, per, seed);
  return last_step(cur, f, 4.0 / epsilon, 0.25 * epsilon, seed);
}

}  // namespace bdd
