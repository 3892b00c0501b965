#include "bdd/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bdd/error.hpp"

namespace bdd {

DenseMatrix dmul(const DenseMatrix& x, const DenseMatrix& y) {
  require(x.cols == y.rows, ErrorKind::invalid_input, "dmul: shape mismatch");
  DenseMatrix z(x.rows, y.cols);
  for (int i = 0; i < x.rows; i++) {
    for (int k = 0; k < x.cols; k++) {
      cplx xv = x.at(i, k);
      if (xv == cplx(0.0)) continue;
      const cplx* yr = &y.a[static_cast<size_t>(k) * y.cols];
      cplx* zr = &z.a[static_cast<size_t>(i) * z.cols];
      for (int j = 0; j < y.cols; j++) zr[j] += xv * yr[j];
    }
  }
  return z;
}

DenseMatrix dadjoint(const DenseMatrix& x) {
  DenseMatrix z(x.cols, x.rows);
  for (int i = 0; i < x.rows; i++)
    for (int j = 0; j < x.cols; j++) z.at(j, i) = std::conj(x.at(i, j));
  return z;
}

DenseMatrix dadd(const DenseMatrix& x, const DenseMatrix& y, cplx cx, cplx cy) {
  require(x.rows == y.rows && x.cols == y.cols, ErrorKind::invalid_input,
          "dadd: shape mismatch");
  DenseMatrix z(x.rows, x.cols);
  for (size_t i = 0; i < z.a.size(); i++) z.a[i] = cx * x.a[i] + cy * y.a[i];
  return z;
}

DenseMatrix dense_eye(int n) {
  DenseMatrix z(n, n);
  for (int i = 0; i < n; i++) z.at(i, i) = 1.0;
  return z;
}

double dfro(const DenseMatrix& x) {
  double s = 0.0;
  for (const cplx& c : x.a) s += std::norm(c);
  return std::sqrt(s);
}

DenseMatrix to_matrix(const DenseHermitian& m) {
  DenseMatrix z(m.N, m.N);
  z.a = m.a;
  return z;
}

DenseHermitian hermitify(const DenseMatrix& m, double tol) {
  require(m.rows == m.cols, ErrorKind::invalid_input, "hermitify: not square");
  double amax = 0.0;
  for (const cplx& c : m.a) amax = std::max(amax, std::abs(c));
  DenseHermitian h(m.rows);
  for (int i = 0; i < m.rows; i++) {
    for (int j = i; j < m.rows; j++) {
      cplx d = m.at(i, j) - std::conj(m.at(j, i));
      require(std::abs(d) <= tol * std::max(amax, 1e-300), ErrorKind::invalid_input,
              "hermitify: matrix is not Hermitian");
      cplx v = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));
      if (i == j) v = v.real();
      h.at(i, j) = v;
      h.at(j, i) = std::conj(v);
    }
  }
  return h;
}

DenseHermitian to_dense(const BlockSparseMatrix& m) {
  require(m.hermitian, ErrorKind::invalid_input, "to_dense: matrix is not Hermitian");
  int nn = m.n * m.r;
  require(nn <= kDenseCap, ErrorKind::size_cap, "dense oracle capped at N = 3000");
  DenseHermitian h(nn);
  for (int i = 0; i < m.n; i++)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      const cplx* blk = m.block_data(k);
      int j = m.col[k];
      for (int a = 0; a < m.r; a++)
        for (int b = 0; b < m.r; b++) h.at(i * m.r + a, j * m.r + b) = blk[a * m.r + b];
    }
  return h;
}

DenseMatrix to_dense_rect(const BlockSparseMatrix& m) {
  require(m.n * m.r <= kDenseCap && m.nc * m.r <= kDenseCap, ErrorKind::size_cap,
          "dense oracle capped at N = 3000");
  DenseMatrix h(m.n * m.r, m.nc * m.r);
  for (int i = 0; i < m.n; i++)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      const cplx* blk = m.block_data(k);
      int j = m.col[k];
      for (int a = 0; a < m.r; a++)
        for (int b = 0; b < m.r; b++) h.at(i * m.r + a, j * m.r + b) = blk[a * m.r + b];
    }
  return h;
}

DenseHermitian to_dense(const BlockDiagonalMatrix& d) {
  int nn = d.n * d.r;
  require(nn <= kDenseCap, ErrorKind::size_cap, "dense oracle capped at N = 3000");
  DenseHermitian h(nn);
  for (int i = 0; i < d.n; i++) {
    const cplx* blk = d.block_data(i);
    for (int a = 0; a < d.r; a++)
      for (int b = 0; b < d.r; b++) h.at(i * d.r + a, i * d.r + b) = blk[a * d.r + b];
  }
  return h;
}

DenseMatrix to_dense(const UnitaryTransferMatrix& b) {
  int nn = b.n * b.r;
  int cols = static_cast<int>(b.edges.size()) * b.r;
  require(nn <= kDenseCap && cols <= kDenseCap, ErrorKind::size_cap,
          "dense oracle capped at N = 3000");
  DenseMatrix h(nn, cols);
  for (size_t t = 0; t < b.edges.size(); t++) {
    const TransferEdge& e = b.edges[t];
    for (int a = 0; a < b.r; a++)
      for (int c = 0; c < b.r; c++) {
        h.at(e.u * b.r + a, static_cast<int>(t) * b.r + c) = e.qu.at(a, c);
        h.at(e.v * b.r + a, static_cast<int>(t) * b.r + c) = e.qv.at(a, c);
      }
  }
  return h;
}

std::vector<int> expand_indices(const std::vector<int>& blocks, int r) {
  std::vector<int> out;
  out.reserve(blocks.size() * r);
  for (int b : blocks)
    for (int t = 0; t < r; t++) out.push_back(b * r + t);
  return out;
}

std::vector<int> complement_indices(const std::vector<int>& sub, int n) {
  std::vector<char> in(n, 0);
  for (int i : sub) {
    require(i >= 0 && i < n, ErrorKind::invalid_input, "index out of range");
    in[i] = 1;
  }
  std::vector<int> out;
  out.reserve(n - sub.size());
  for (int i = 0; i < n; i++)
    if (!in[i]) out.push_back(i);
  return out;
}

// ---- Householder tridiagonalization + implicit QL, used above the Jacobi
// size threshold. Unitary transforms accumulated into q when requested.

static void tridiagonalize(std::vector<cplx>& av, int n, std::vector<double>& d,
                           std::vector<double>& e, std::vector<cplx>* q) {
  auto a = [&](int i, int j) -> cplx& { return av[static_cast<size_t>(i) * n + j]; };
  if (q) {
    q->assign(static_cast<size_t>(n) * n, cplx(0.0));
    for (int i = 0; i < n; i++) (*q)[static_cast<size_t>(i) * n + i] = 1.0;
  }
  std::vector<cplx> u(n), p(n);
  for (int k = 0; k + 2 < n; k++) {
    double scl = 0.0;
    for (int i = k + 1; i < n; i++)
      scl += std::abs(a(i, k).real()) + std::abs(a(i, k).imag());
    if (scl == 0.0) continue;
    double h = 0.0;
    for (int i = k + 1; i < n; i++) {
      u[i] = a(i, k) / scl;
      h += std::norm(u[i]);
    }
    double nrm = std::sqrt(h);
    cplx alpha = u[k + 1];
    cplx phase = (std::abs(alpha) > 0.0) ? alpha / std::abs(alpha) : cplx(1.0);
    u[k + 1] += phase * nrm;
    double uu = 0.0;
    for (int i = k + 1; i < n; i++) uu += std::norm(u[i]);
    if (uu <= 1e-300) continue;
    double beta = 2.0 / uu;

    // p = beta * A u on the trailing block; w = p - (beta <u,p>/2) u
    for (int i = k + 1; i < n; i++) {
      cplx s = 0.0;
      for (int j = k + 1; j < n; j++) s += a(i, j) * u[j];
      p[i] = beta * s;
    }
    double sreal = 0.0;
    for (int i = k + 1; i < n; i++) sreal += (std::conj(u[i]) * p[i]).real();
    for (int i = k + 1; i < n; i++) p[i] -= 0.5 * beta * sreal * u[i];
    for (int i = k + 1; i < n; i++)
      for (int j = k + 1; j < n; j++)
        a(i, j) -= u[i] * std::conj(p[j]) + p[i] * std::conj(u[j]);

    a(k + 1, k) = -phase * nrm * scl;
    a(k, k + 1) = std::conj(a(k + 1, k));
    for (int i = k + 2; i < n; i++) {
      a(i, k) = 0.0;
      a(k, i) = 0.0;
    }
    if (q) {
      cplx* qq = q->data();
      for (int i = 0; i < n; i++) {
        cplx s = 0.0;
        for (int j = k + 1; j < n; j++) s += qq[static_cast<size_t>(i) * n + j] * u[j];
        s *= beta;
        for (int j = k + 1; j < n; j++)
          qq[static_cast<size_t>(i) * n + j] -= s * std::conj(u[j]);
      }
    }
  }

  // phase-scale columns so the subdiagonal becomes real nonnegative
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  std::vector<cplx> phi(n, cplx(1.0));
  d[0] = a(0, 0).real();
  for (int i = 1; i < n; i++) {
    cplx t = a(i, i - 1);
    double at = std::abs(t);
    e[i - 1] = at;
    phi[i] = (at > 0.0) ? phi[i - 1] * (t / at) : phi[i - 1];
    d[i] = a(i, i).real();
  }
  if (q) {
    cplx* qq = q->data();
    for (int i = 0; i < n; i++)
      for (int j = 0; j < n; j++) qq[static_cast<size_t>(i) * n + j] *= phi[j];
  }
}

// real-arithmetic mirror of tridiagonalize, for the eigenvalues-only path on
// matrices with no imaginary part (graph adjacencies / Laplacians); roughly
// 5x faster than the complex version at N ~ 2500
static void tridiagonalize_real(std::vector<double>& av, int n,
                                std::vector<double>& d, std::vector<double>& e) {
  auto a = [&](int i, int j) -> double& { return av[static_cast<size_t>(i) * n + j]; };
  std::vector<double> u(n), p(n);
  for (int k = 0; k + 2 < n; k++) {
    double scl = 0.0;
    for (int i = k + 1; i < n; i++) scl += std::abs(a(i, k));
    if (scl == 0.0) continue;
    double h = 0.0;
    for (int i = k + 1; i < n; i++) {
      u[i] = a(i, k) / scl;
      h += u[i] * u[i];
    }
    double nrm = std::sqrt(h);
    double phase = (u[k + 1] < 0.0) ? -1.0 : 1.0;
    u[k + 1] += phase * nrm;
    double uu = 0.0;
    for (int i = k + 1; i < n; i++) uu += u[i] * u[i];
    if (uu <= 1e-300) continue;
    double beta = 2.0 / uu;
    for (int i = k + 1; i < n; i++) {
      double s = 0.0;
      const double* row = &av[static_cast<size_t>(i) * n];
      for (int j = k + 1; j < n; j++) s += row[j] * u[j];
      p[i] = beta * s;
    }
    double sreal = 0.0;
    for (int i = k + 1; i < n; i++) sreal += u[i] * p[i];
    for (int i = k + 1; i < n; i++) p[i] -= 0.5 * beta * sreal * u[i];
    for (int i = k + 1; i < n; i++) {
      double* row = &av[static_cast<size_t>(i) * n];
      const double ui = u[i], pi = p[i];
      for (int j = k + 1; j < n; j++) row[j] -= ui * p[j] + pi * u[j];
    }
    a(k + 1, k) = -phase * nrm * scl;
    a(k, k + 1) = a(k + 1, k);
    for (int i = k + 2; i < n; i++) {
      a(i, k) = 0.0;
      a(k, i) = 0.0;
    }
  }
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  d[0] = a(0, 0);
  for (int i = 1; i < n; i++) {
    e[i - 1] = std::abs(a(i, i - 1));
    d[i] = a(i, i);
  }
}

static void tql_implicit(std::vector<double>& d, std::vector<double>& e, int n,
                         std::vector<cplx>* q) {
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; l++) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; m++) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd + 1e-300) break;
      }
      if (m != l) {
        if (iter++ == 60) fail(ErrorKind::numerical, "QL iteration failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; i--) {
          double f = s * e[i], b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (q) {
            cplx* qq = q->data();
            for (int k = 0; k < n; k++) {
              cplx f2 = qq[static_cast<size_t>(k) * n + i + 1];
              qq[static_cast<size_t>(k) * n + i + 1] =
                  s * qq[static_cast<size_t>(k) * n + i] + c * f2;
              qq[static_cast<size_t>(k) * n + i] =
                  c * qq[static_cast<size_t>(k) * n + i] - s * f2;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

constexpr int kJacobiEigMax = 600;

void hermitian_eig(const DenseHermitian& m, std::vector<double>& w,
                   std::vector<cplx>* v) {
  int n = m.N;
  require(n <= kDenseCap, ErrorKind::size_cap, "dense oracle capped at N = 3000");
  w.assign(n, 0.0);
  if (n == 0) {
    if (v) v->clear();
    return;
  }
  if (n <= kJacobiEigMax) {
    std::vector<cplx> work = m.a;
    if (v) v->assign(static_cast<size_t>(n) * n, cplx(0.0));
    jacobi_hermitian_eig(work.data(), n, w.data(), v ? v->data() : nullptr);
    return;
  }
  std::vector<double> d, e;
  if (!v && std::all_of(m.a.begin(), m.a.end(),
                        [](const cplx& z) { return z.imag() == 0.0; })) {
    std::vector<double> rwork(m.a.size());
    for (size_t i = 0; i < m.a.size(); i++) rwork[i] = m.a[i].real();
    tridiagonalize_real(rwork, n, d, e);
    tql_implicit(d, e, n, nullptr);
    std::sort(d.begin(), d.end());
    w = d;
    return;
  }
  std::vector<cplx> work = m.a;
  tridiagonalize(work, n, d, e, v);
  tql_implicit(d, e, n, v);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return d[x] < d[y]; });
  for (int i = 0; i < n; i++) w[i] = d[order[i]];
  if (v) {
    std::vector<cplx> tmp(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; j++)
      for (int i = 0; i < n; i++)
        tmp[static_cast<size_t>(i) * n + j] = (*v)[static_cast<size_t>(i) * n + order[j]];
    v->swap(tmp);
  }
}

double dense_op_norm(const DenseHermitian& m) {
  if (m.N == 0) return 0.0;
  std::vector<double> w;
  hermitian_eig(m, w, nullptr);
  return std::max(std::abs(w.front()), std::abs(w.back()));
}

// ---- pivoted Cholesky: P M P^T = R^* R with diagonal pivoting

DenseFactor dense_factor(const DenseHermitian& m) {
  int n = m.N;
  DenseFactor f;
  f.n = n;
  f.r = m.a;
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), 0);
  auto a = [&](int i, int j) -> cplx& { return f.r[static_cast<size_t>(i) * n + j]; };
  double scale = 0.0;
  for (int i = 0; i < n; i++) scale = std::max(scale, std::abs(a(i, i).real()));
  double tol = n * 1e-14 * std::max(scale, 1e-300);
  for (int k = 0; k < n; k++) {
    int pv = k;
    for (int j = k + 1; j < n; j++)
      if (a(j, j).real() > a(pv, pv).real()) pv = j;
    if (pv != k) {
      std::swap(f.perm[k], f.perm[pv]);
      // only the upper triangle is live; swap rows/columns k and pv in
      // hermitian fashion. Rows above k already hold finished factor rows,
      // so only their columns move.
      for (int t = 0; t < k; t++) std::swap(a(t, k), a(t, pv));
      std::swap(a(k, k), a(pv, pv));
      for (int t = k + 1; t < pv; t++) {
        cplx tmp = a(k, t);
        a(k, t) = std::conj(a(t, pv));
        a(t, pv) = std::conj(tmp);
      }
      a(k, pv) = std::conj(a(k, pv));
      for (int t = pv + 1; t < n; t++) std::swap(a(k, t), a(pv, t));
    }
    double piv = a(k, k).real();
    if (!(piv > tol)) fail(ErrorKind::numerical, "singular pivot in dense Cholesky");
    double rkk = std::sqrt(piv);
    a(k, k) = rkk;
    for (int j = k + 1; j < n; j++) a(k, j) /= rkk;
    for (int i = k + 1; i < n; i++) {
      cplx cki = std::conj(a(k, i));
      cplx* ri = &a(i, i);
      const cplx* rk = &a(k, i);
      for (int j = 0; j <= n - 1 - i; j++) ri[j] -= cki * rk[j];
    }
  }
  // the area below the diagonal is scratch after the loop; clear it so
  // serialized factors are reproducible
  for (int i = 1; i < n; i++)
    for (int j = 0; j < i; j++) a(i, j) = cplx(0.0, 0.0);
  return f;
}

void factor_solve(const DenseFactor& f, cplx* x) {
  int n = f.n;
  auto a = [&](int i, int j) -> const cplx& { return f.r[static_cast<size_t>(i) * n + j]; };
  std::vector<cplx> y(n);
  for (int i = 0; i < n; i++) {
    cplx s = x[f.perm[i]];
    for (int k = 0; k < i; k++) s -= std::conj(a(k, i)) * y[k];
    y[i] = s / a(i, i).real();
  }
  for (int i = n - 1; i >= 0; i--) {
    cplx s = y[i];
    for (int k = i + 1; k < n; k++) s -= a(i, k) * y[k];
    y[i] = s / a(i, i).real();
  }
  for (int i = 0; i < n; i++) x[f.perm[i]] = y[i];
}

DenseHermitian dense_schur(const DenseHermitian& m, const std::vector<int>& f) {
  if (f.empty()) return m;
  std::vector<int> fs = f;
  std::sort(fs.begin(), fs.end());
  require(std::adjacent_find(fs.begin(), fs.end()) == fs.end(), ErrorKind::invalid_input,
          "dense_schur: duplicate index");
  std::vector<int> c = complement_indices(fs, m.N);
  int nf = static_cast<int>(fs.size());
  int ncm = static_cast<int>(c.size());

  DenseHermitian aff(nf);
  for (int i = 0; i < nf; i++)
    for (int j = 0; j < nf; j++) aff.at(i, j) = m.at(fs[i], fs[j]);
  std::vector<double> wf;
  hermitian_eig(aff, wf, nullptr);
  double mnorm = dense_op_norm(m);
  if (!(wf[0] > 1e-12 * mnorm))
    fail(ErrorKind::numerical, "dense_schur: singular pivot block");

  DenseMatrix afc(nf, ncm);
  for (int i = 0; i < nf; i++)
    for (int j = 0; j < ncm; j++) afc.at(i, j) = m.at(fs[i], c[j]);
  DenseFactor fac = dense_factor(aff);
  DenseMatrix x(nf, ncm);
  std::vector<cplx> sol(nf);
  for (int j = 0; j < ncm; j++) {
    for (int i = 0; i < nf; i++) sol[i] = afc.at(i, j);
    factor_solve(fac, sol.data());
    for (int i = 0; i < nf; i++) x.at(i, j) = sol[i];
  }
  DenseMatrix prod = dmul(dadjoint(afc), x);  // M[C,F] M[F,F]^{-1} M[F,C]
  DenseHermitian out(ncm);
  for (int i = 0; i < ncm; i++)
    for (int j = 0; j < ncm; j++) out.at(i, j) = m.at(c[i], c[j]) - prod.at(i, j);
  return hermitify(to_matrix(out), 1e-6);
}

double approx_epsilon(const DenseHermitian& a, const DenseHermitian& b) {
  require(a.N == b.N, ErrorKind::invalid_input, "approx_epsilon: dimension mismatch");
  int n = a.N;
  if (n == 0) return 0.0;
  std::vector<double> wb;
  std::vector<cplx> vb;
  hermitian_eig(b, wb, &vb);
  double lmax = wb[n - 1];
  double afro = 0.0;
  for (const cplx& c : a.a) afro += std::norm(c);
  afro = std::sqrt(afro);
  if (lmax <= 1e-300) {
    require(afro <= 1e-300, ErrorKind::invalid_input, "approx_epsilon: B is zero, A is not");
    return 0.0;
  }
  require(wb[0] >= -1e-10 * lmax, ErrorKind::invalid_input,
          "approx_epsilon: B is indefinite");
  double cutoff = 1e-10 * lmax;
  std::vector<int> range;
  for (int i = 0; i < n; i++)
    if (wb[i] > cutoff) range.push_back(i);
  int k = static_cast<int>(range.size());

  if (k < n) {
    // A must vanish on the null space of B
    for (int i = 0; i < n; i++) {
      if (wb[i] > cutoff) continue;
      double nv = 0.0;
      for (int row = 0; row < n; row++) {
        cplx s = 0.0;
        for (int col2 = 0; col2 < n; col2++)
          s += a.a[static_cast<size_t>(row) * n + col2] * vb[static_cast<size_t>(col2) * n + i];
        nv += std::norm(s);
      }
      require(std::sqrt(nv) <= 1e-8 * std::max(afro, 1e-300), ErrorKind::invalid_input,
              "approx_epsilon: null spaces differ");
    }
  }

  // whitened pencil restricted to the range of B
  DenseMatrix r(n, k);
  for (int j = 0; j < k; j++) {
    double wsc = 1.0 / std::sqrt(wb[range[j]]);
    for (int i = 0; i < n; i++)
      r.at(i, j) = vb[static_cast<size_t>(i) * n + range[j]] * wsc;
  }
  DenseMatrix s = dmul(dadjoint(r), dmul(to_matrix(a), r));
  DenseHermitian sh = hermitify(s, 1e-6);
  std::vector<double> ws;
  hermitian_eig(sh, ws, nullptr);
  double out = 0.0;
  for (double lam : ws) {
    require(lam > 0.0, ErrorKind::invalid_input,
            "approx_epsilon: A is not positive definite on the range of B");
    out = std::max(out, std::abs(std::log(lam)));
  }
  return out;
}

bool loewner_leq(const DenseHermitian& a, const DenseHermitian& b, double tol) {
  require(a.N == b.N, ErrorKind::invalid_input, "loewner_leq: dimension mismatch");
  if (a.N == 0) return true;
  DenseHermitian diff(a.N);
  for (size_t i = 0; i < diff.a.size(); i++) diff.a[i] = b.a[i] - a.a[i];
  std::vector<double> wd;
  hermitian_eig(diff, wd, nullptr);
  return wd[0] >= -tol * dense_op_norm(b);
}

double min_nonzero_eig(const DenseHermitian& m) {
  require(m.N > 0, ErrorKind::invalid_input, "empty matrix");
  std::vector<double> w;
  hermitian_eig(m, w, nullptr);
  double lmax = w[m.N - 1];
  if (lmax <= 1e-300) fail(ErrorKind::degenerate, "min_nonzero_eig: zero matrix");
  require(w[0] >= -1e-9 * lmax, ErrorKind::precondition, "min_nonzero_eig: not PSD");
  for (double lam : w)
    if (lam > 1e-10 * lmax) return lam;
  fail(ErrorKind::degenerate, "min_nonzero_eig: zero matrix");
}

double condition_number(const DenseHermitian& m) {
  std::vector<double> w;
  hermitian_eig(m, w, nullptr);
  double lmax = w[m.N - 1];
  return lmax / min_nonzero_eig(m);
}

std::vector<cplx> dense_solve(const DenseHermitian& m, const std::vector<cplx>& b) {
  require(static_cast<int>(b.size()) == m.N, ErrorKind::invalid_input,
          "dense_solve: dimension mismatch");
  DenseFactor f = dense_factor(m);
  std::vector<cplx> x = b;
  factor_solve(f, x.data());
  return x;
}

DenseHermitian dense_inverse(const DenseHermitian& m) {
  DenseFactor f = dense_factor(m);
  int n = m.N;
  DenseMatrix inv(n, n);
  std::vector<cplx> x(n);
  for (int j = 0; j < n; j++) {
    std::fill(x.begin(), x.end(), cplx(0.0));
    x[j] = 1.0;
    factor_solve(f, x.data());
    for (int i = 0; i < n; i++) inv.at(i, j) = x[i];
  }
  return hermitify(inv, 1e-6);
}

DenseHermitian dense_pinv(const DenseHermitian& m, double rel_cut) {
  int n = m.N;
  std::vector<double> w;
  std::vector<cplx> v;
  hermitian_eig(m, w, &v);
  double lmax = (n > 0) ? std::max(std::abs(w[0]), std::abs(w[n - 1])) : 0.0;
  require(n == 0 || w[0] >= -rel_cut * std::max(lmax, 1e-300), ErrorKind::invalid_input,
          "dense_pinv: not PSD");
  DenseMatrix p(n, n);
  for (int t = 0; t < n; t++) {
    if (w[t] <= rel_cut * lmax) continue;
    double iw = 1.0 / w[t];
    for (int i = 0; i < n; i++) {
      cplx vi = v[static_cast<size_t>(i) * n + t];
      if (vi == cplx(0.0)) continue;
      for (int j = 0; j < n; j++)
        p.at(i, j) += vi * iw * std::conj(v[static_cast<size_t>(j) * n + t]);
    }
  }
  return hermitify(p, 1e-6);
}

}  // namespace bdd
