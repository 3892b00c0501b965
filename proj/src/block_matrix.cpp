#include "bdd/block_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bdd {

int BlockSparseMatrix::find(int i, int j) const {
  int lo = row_ptr[i], hi = row_ptr[i + 1];
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (col[mid] < j)
      lo = mid + 1;
    else
      hi = mid;
  }
  return (lo < row_ptr[i + 1] && col[lo] == j) ? lo : -1;
}

void BsmBuilder::add(int i, int j, const Block& b) {
  require(i >= 0 && i < n_ && j >= 0 && j < n_, ErrorKind::invalid_input,
          "builder: block index out of range");
  require(b.r == r_, ErrorKind::invalid_input, "builder: block size mismatch");
  ti_.push_back(i);
  tj_.push_back(j);
  tv_.insert(tv_.end(), b.a.begin(), b.a.begin() + r_ * r_);
}

void BsmBuilder::add_sym(int i, int j, const Block& b) {
  if (i == j) {
    add(i, i, hermitian_part(b));
  } else {
    add(i, j, b);
    add(j, i, adjoint(b));
  }
}

BlockSparseMatrix BsmBuilder::finish() {
  const int rr = r_ * r_;
  size_t cnt = ti_.size();
  std::vector<int> order(cnt);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (ti_[x] != ti_[y]) return ti_[x] < ti_[y];
    return tj_[x] < tj_[y];
  });

  // merge duplicates
  std::vector<int> mi, mj;
  std::vector<cplx> mv;
  for (size_t t = 0; t < cnt; t++) {
    int k = order[t];
    if (!mi.empty() && mi.back() == ti_[k] && mj.back() == tj_[k]) {
      cplx* dst = &mv[mv.size() - rr];
      const cplx* src = &tv_[static_cast<size_t>(k) * rr];
      for (int e = 0; e < rr; e++) dst[e] += src[e];
    } else {
      mi.push_back(ti_[k]);
      mj.push_back(tj_[k]);
      const cplx* src = &tv_[static_cast<size_t>(k) * rr];
      mv.insert(mv.end(), src, src + rr);
    }
  }

  auto get_blk = [&](size_t k) {
    Block b(r_);
    for (int e = 0; e < rr; e++) b.a[e] = mv[k * rr + e];
    return b;
  };
  auto set_blk = [&](size_t k, const Block& b) {
    for (int e = 0; e < rr; e++) mv[k * rr + e] = b.a[e];
  };
  auto locate = [&](int i, int j) -> long {
    size_t lo = 0, hi = mi.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (mi[mid] < i || (mi[mid] == i && mj[mid] < j))
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo < mi.size() && mi[lo] == i && mj[lo] == j) return static_cast<long>(lo);
    return -1;
  };

  // symmetrize: average disagreeing pairs, mirror lone triangle entries
  std::vector<int> xi, xj;
  std::vector<cplx> xv;
  for (size_t k = 0; k < mi.size(); k++) {
    int i = mi[k], j = mj[k];
    if (i == j) {
      set_blk(k, hermitian_part(get_blk(k)));
    } else if (i < j) {
      long mk = locate(j, i);
      if (mk >= 0) {
        Block avg = get_blk(k) + adjoint(get_blk(static_cast<size_t>(mk)));
        avg *= cplx(0.5);
        set_blk(k, avg);
        set_blk(static_cast<size_t>(mk), adjoint(avg));
      } else {
        Block b = adjoint(get_blk(k));
        xi.push_back(j);
        xj.push_back(i);
        xv.insert(xv.end(), b.a.begin(), b.a.begin() + rr);
      }
    } else {
      if (locate(j, i) < 0) {
        Block b = adjoint(get_blk(k));
        xi.push_back(j);
        xj.push_back(i);
        xv.insert(xv.end(), b.a.begin(), b.a.begin() + rr);
      }
    }
  }
  if (!xi.empty()) {
    mi.insert(mi.end(), xi.begin(), xi.end());
    mj.insert(mj.end(), xj.begin(), xj.end());
    mv.insert(mv.end(), xv.begin(), xv.end());
    std::vector<int> ord2(mi.size());
    std::iota(ord2.begin(), ord2.end(), 0);
    std::sort(ord2.begin(), ord2.end(), [&](int x, int y) {
      if (mi[x] != mi[y]) return mi[x] < mi[y];
      return mj[x] < mj[y];
    });
    std::vector<int> ni(mi.size()), nj(mi.size());
    std::vector<cplx> nv(mv.size());
    for (size_t t = 0; t < ord2.size(); t++) {
      ni[t] = mi[ord2[t]];
      nj[t] = mj[ord2[t]];
      for (int e = 0; e < rr; e++)
        nv[t * rr + e] = mv[static_cast<size_t>(ord2[t]) * rr + e];
    }
    mi.swap(ni);
    mj.swap(nj);
    mv.swap(nv);
  }

  // drop numerically-zero blocks; decided on the canonical (upper) member of
  // each pair so mirrored blocks live or die together
  std::vector<double> fn(mi.size());
  double fmax = 0.0;
  for (size_t k = 0; k < mi.size(); k++) {
    double s = 0.0;
    for (int e = 0; e < rr; e++) s += std::norm(mv[k * rr + e]);
    fn[k] = std::sqrt(s);
    fmax = std::max(fmax, fn[k]);
  }
  double cutoff = 1e-14 * fmax;
  std::vector<char> keep(mi.size(), 1);
  for (size_t k = 0; k < mi.size(); k++) {
    int i = mi[k], j = mj[k];
    size_t canon = k;
    if (i > j) {
      long mk = locate(j, i);
      if (mk >= 0) canon = static_cast<size_t>(mk);
    }
    keep[k] = fn[canon] > cutoff ? 1 : 0;
  }

  BlockSparseMatrix out;
  out.n = n_;
  out.nc = n_;
  out.r = r_;
  out.hermitian = true;
  out.row_ptr.assign(n_ + 1, 0);
  for (size_t k = 0; k < mi.size(); k++)
    if (keep[k]) out.row_ptr[mi[k] + 1]++;
  for (int i = 0; i < n_; i++) out.row_ptr[i + 1] += out.row_ptr[i];
  out.col.resize(out.row_ptr[n_]);
  out.val.resize(static_cast<size_t>(out.row_ptr[n_]) * rr);
  out.bnorm.resize(out.row_ptr[n_]);
  std::vector<int> cursor(out.row_ptr.begin(), out.row_ptr.end() - 1);
  for (size_t k = 0; k < mi.size(); k++) {
    if (!keep[k]) continue;
    int pos = cursor[mi[k]]++;
    out.col[pos] = mj[k];
    for (int e = 0; e < rr; e++)
      out.val[static_cast<size_t>(pos) * rr + e] = mv[k * rr + e];
    out.bnorm[pos] = block_op_norm(out.block_at(pos));
  }
  return out;
}

double vec_norm(const BlockVector& x) {
  double s = 0.0;
  for (const cplx& c : x.v) s += std::norm(c);
  return std::sqrt(s);
}

cplx vec_dot(const BlockVector& x, const BlockVector& y) {
  cplx s = 0.0;
  for (size_t i = 0; i < x.v.size(); i++) s += std::conj(x.v[i]) * y.v[i];
  return s;
}

void vec_axpy(BlockVector& y, cplx a, const BlockVector& x) {
  for (size_t i = 0; i < y.v.size(); i++) y.v[i] += a * x.v[i];
}

BddReport bdd_report(const BlockSparseMatrix& m, double alpha) {
  require(m.hermitian, ErrorKind::precondition, "bdd_report needs a Hermitian matrix");
  BddReport rep;
  rep.slack.assign(m.n, 0.0);
  rep.ok = true;
  double worst = 0.0;
  for (int i = 0; i < m.n; i++) {
    double offsum = 0.0;
    double dmin = 0.0;
    double dnorm = 0.0;
    bool have_diag = false;
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      if (m.col[k] == i) {
        double w[kMaxR];
        block_eig(m.block_at(k), w, nullptr);
        dmin = w[0];
        dnorm = std::max(std::abs(w[0]), std::abs(w[m.r - 1]));
        have_diag = true;
      } else {
        offsum += m.bnorm[k];
      }
    }
    (void)have_diag;  // absent diagonal reads as zero
    double need = (1.0 + alpha) * offsum;
    double slack = dmin - need;
    rep.slack[i] = slack;
    double tol = 1e-10 * std::max({1.0, dnorm, need});
    if (slack < -tol) {
      rep.ok = false;
      if (rep.worst_row < 0 || slack < worst) {
        rep.worst_row = i;
        worst = slack;
      }
    }
  }
  return rep;
}

bool is_bdd(const BlockSparseMatrix& m) { return bdd_report(m, 0.0).ok; }

bool is_alpha_bdd(const BlockSparseMatrix& m, double alpha) {
  require(alpha >= 0.0, ErrorKind::parameter, "alpha must be nonnegative");
  return bdd_report(m, alpha).ok;
}

std::vector<double> offdiag_norm_sums(const BlockSparseMatrix& m) {
  std::vector<double> s(m.n, 0.0);
  for (int i = 0; i < m.n; i++)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++)
      if (m.col[k] != i) s[i] += m.bnorm[k];
  return s;
}

void factorize_bdd(const BlockSparseMatrix& m, BlockDiagonalMatrix& x,
                   UnitaryTransferMatrix& b) {
  BddReport rep = bdd_report(m, 0.0);
  if (!rep.ok)
    fail(ErrorKind::precondition,
         "factorize_bdd: matrix is not bDD (row " + std::to_string(rep.worst_row) + ")");
  std::vector<double> offsum = offdiag_norm_sums(m);
  x = BlockDiagonalMatrix::zero(m.n, m.r);
  for (int i = 0; i < m.n; i++) {
    Block d = m.diag(i);
    for (int t = 0; t < m.r; t++) d.at(t, t) -= offsum[i];
    x.set(i, d);
  }
  b.n = m.n;
  b.r = m.r;
  b.edges.clear();
  for (int i = 0; i < m.n; i++) {
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      int j = m.col[k];
      if (j <= i) continue;
      Block d = m.block_at(k);
      double w;
      Block q1, q2;
      unitary_split(d, w, q1, q2);
      double c = std::sqrt(w / 2.0);
      for (const Block* q : {&q1, &q2}) {
        TransferEdge e;
        e.u = i;
        e.v = j;
        e.w = w / 2.0;
        e.qu = Block::identity(m.r, c);
        e.qv = adjoint(*q) * cplx(c);
        b.edges.push_back(e);
      }
    }
  }
}

BlockSparseMatrix assemble_from_factors(const BlockDiagonalMatrix& x,
                                        const UnitaryTransferMatrix& b) {
  BsmBuilder bld(x.n, x.r);
  for (int i = 0; i < x.n; i++) bld.add(i, i, x.get(i));
  for (const TransferEdge& e : b.edges) {
    bld.add(e.u, e.u, mul_adj(e.qu, e.qu));
    bld.add(e.v, e.v, mul_adj(e.qv, e.qv));
    bld.add_sym(e.u, e.v, mul_adj(e.qu, e.qv));
  }
  return bld.finish();
}

BlockVector matvec(const BlockSparseMatrix& m, const BlockVector& x) {
  require(x.n == m.nc && x.r == m.r, ErrorKind::invalid_input, "matvec: dimension mismatch");
  BlockVector y = BlockVector::zero(m.n, m.r);
  const int r = m.r;
  for (int i = 0; i < m.n; i++) {
    cplx* yi = y.at(i);
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      const cplx* blk = m.block_data(k);
      const cplx* xj = x.at(m.col[k]);
      for (int a = 0; a < r; a++) {
        cplx s = 0.0;
        for (int c = 0; c < r; c++) s += blk[a * r + c] * xj[c];
        yi[a] += s;
      }
    }
  }
  return y;
}

void masked_matvec_add(const BlockSparseMatrix& m, const std::vector<int>& rows,
                       const std::vector<int>& cols, const BlockVector& x,
                       BlockVector& y, cplx s) {
  const int r = m.r;
  std::vector<int> colpos(m.nc, -1);
  for (size_t t = 0; t < cols.size(); t++) colpos[cols[t]] = static_cast<int>(t);
  for (size_t t = 0; t < rows.size(); t++) {
    int i = rows[t];
    cplx* yi = y.at(static_cast<int>(t));
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      int jp = colpos[m.col[k]];
      if (jp < 0) continue;
      const cplx* blk = m.block_data(k);
      const cplx* xj = x.at(jp);
      for (int a = 0; a < r; a++) {
        cplx acc = 0.0;
        for (int c = 0; c < r; c++) acc += blk[a * r + c] * xj[c];
        yi[a] += s * acc;
      }
    }
  }
}

BlockSparseMatrix submatrix(const BlockSparseMatrix& m, const std::vector<int>& rows,
                            const std::vector<int>& cols) {
  BlockSparseMatrix out;
  out.n = static_cast<int>(rows.size());
  out.nc = static_cast<int>(cols.size());
  out.r = m.r;
  out.hermitian = m.hermitian && rows == cols;
  std::vector<int> colpos(m.nc, -1);
  for (size_t t = 0; t < cols.size(); t++) colpos[cols[t]] = static_cast<int>(t);
  out.row_ptr.assign(out.n + 1, 0);
  const int rr = m.r * m.r;
  for (size_t t = 0; t < rows.size(); t++) {
    int i = rows[t];
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++)
      if (colpos[m.col[k]] >= 0) out.row_ptr[t + 1]++;
  }
  for (int i = 0; i < out.n; i++) out.row_ptr[i + 1] += out.row_ptr[i];
  out.col.resize(out.row_ptr[out.n]);
  out.val.resize(static_cast<size_t>(out.row_ptr[out.n]) * rr);
  out.bnorm.resize(out.row_ptr[out.n]);
  int pos = 0;
  for (size_t t = 0; t < rows.size(); t++) {
    int i = rows[t];
    int start = pos;
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      int jp = colpos[m.col[k]];
      if (jp < 0) continue;
      out.col[pos] = jp;
      for (int e = 0; e < rr; e++)
        out.val[static_cast<size_t>(pos) * rr + e] = m.val[static_cast<size_t>(k) * rr + e];
      out.bnorm[pos] = m.bnorm[k];
      pos++;
    }
    // row entries inherit source order; relabeling can permute, so re-sort
    std::vector<int> idx(pos - start);
    std::iota(idx.begin(), idx.end(), start);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return out.col[a] < out.col[b]; });
    std::vector<int> c2(idx.size());
    std::vector<cplx> v2(idx.size() * rr);
    std::vector<double> n2(idx.size());
    for (size_t q = 0; q < idx.size(); q++) {
      c2[q] = out.col[idx[q]];
      n2[q] = out.bnorm[idx[q]];
      for (int e = 0; e < rr; e++)
        v2[q * rr + e] = out.val[static_cast<size_t>(idx[q]) * rr + e];
    }
    for (size_t q = 0; q < idx.size(); q++) {
      out.col[start + q] = c2[q];
      out.bnorm[start + q] = n2[q];
      for (int e = 0; e < rr; e++)
        out.val[static_cast<size_t>(start + q) * rr + e] = v2[q * rr + e];
    }
  }
  return out;
}

BlockSparseMatrix add_scaled(const BlockSparseMatrix& a, const BlockSparseMatrix& b,
                             cplx ca, cplx cb) {
  require(a.n == b.n && a.r == b.r && a.hermitian && b.hermitian, ErrorKind::invalid_input,
          "add_scaled: incompatible matrices");
  BsmBuilder bld(a.n, a.r);
  for (int i = 0; i < a.n; i++)
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; k++)
      bld.add(i, a.col[k], a.block_at(k) * ca);
  for (int i = 0; i < b.n; i++)
    for (int k = b.row_ptr[i]; k < b.row_ptr[i + 1]; k++)
      bld.add(i, b.col[k], b.block_at(k) * cb);
  return bld.finish();
}

BlockSparseMatrix scale(const BlockSparseMatrix& m, cplx s) {
  BlockSparseMatrix out = m;
  for (cplx& c : out.val) c *= s;
  for (double& nn : out.bnorm) nn *= std::abs(s);
  return out;
}

BlockSparseMatrix pad_identity(const BlockSparseMatrix& m, double xi) {
  BsmBuilder bld(m.n, m.r);
  for (int i = 0; i < m.n; i++)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) bld.add(i, m.col[k], m.block_at(k));
  for (int i = 0; i < m.n; i++) bld.add(i, i, Block::identity(m.r, xi));
  return bld.finish();
}

BlockSparseMatrix diag_to_bsm(const BlockDiagonalMatrix& d) {
  BsmBuilder bld(d.n, d.r);
  for (int i = 0; i < d.n; i++) bld.add(i, i, d.get(i));
  return bld.finish();
}

}  // namespace bdd
