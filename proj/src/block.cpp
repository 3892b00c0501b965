#include "bdd/block.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bdd {

bool block_finite(const Block& b) {
  for (int i = 0; i < b.r * b.r; i++) {
    if (!std::isfinite(b.a[i].real()) || !std::isfinite(b.a[i].imag())) return false;
  }
  return true;
}

Block adjoint(const Block& b) {
  Block out(b.r);
  for (int i = 0; i < b.r; i++)
    for (int j = 0; j < b.r; j++) out.at(i, j) = std::conj(b.at(j, i));
  return out;
}

Block mul(const Block& x, const Block& y) {
  int r = x.r;
  Block out(r);
  for (int i = 0; i < r; i++)
    for (int k = 0; k < r; k++) {
      cplx xik = x.at(i, k);
      if (xik == cplx(0.0)) continue;
      for (int j = 0; j < r; j++) out.at(i, j) += xik * y.at(k, j);
    }
  return out;
}

Block mul_adj(const Block& x, const Block& y) {
  int r = x.r;
  Block out(r);
  for (int i = 0; i < r; i++)
    for (int j = 0; j < r; j++) {
      cplx s = 0.0;
      for (int k = 0; k < r; k++) s += x.at(i, k) * std::conj(y.at(j, k));
      out.at(i, j) = s;
    }
  return out;
}

Block adj_mul(const Block& x, const Block& y) {
  int r = x.r;
  Block out(r);
  for (int i = 0; i < r; i++)
    for (int j = 0; j < r; j++) {
      cplx s = 0.0;
      for (int k = 0; k < r; k++) s += std::conj(x.at(k, i)) * y.at(k, j);
      out.at(i, j) = s;
    }
  return out;
}

Block hermitian_part(const Block& b) {
  Block out(b.r);
  for (int i = 0; i < b.r; i++)
    for (int j = 0; j < b.r; j++)
      out.at(i, j) = 0.5 * (b.at(i, j) + std::conj(b.at(j, i)));
  return out;
}

double fro_norm(const Block& b) {
  double s = 0.0;
  for (int i = 0; i < b.r * b.r; i++) s += std::norm(b.a[i]);
  return std::sqrt(s);
}

bool is_zero(const Block& b, double tol) {
  for (int i = 0; i < b.r * b.r; i++) {
    if (std::abs(b.a[i].real()) > tol || std::abs(b.a[i].imag()) > tol) return false;
  }
  return true;
}

void jacobi_hermitian_eig(cplx* a, int n, double* w, cplx* v, double tol) {
  auto A = [&](int i, int j) -> cplx& { return a[i * n + j]; };
  if (v) {
    for (int i = 0; i < n; i++)
      for (int j = 0; j < n; j++) v[i * n + j] = (i == j) ? 1.0 : 0.0;
  }
  double total = 0.0;
  for (int i = 0; i < n * n; i++) total += std::norm(a[i]);
  total = std::sqrt(total);
  double thresh = tol * std::max(total, 1e-300);

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; sweep++) {
    double off = 0.0;
    for (int i = 0; i < n; i++)
      for (int j = i + 1; j < n; j++) off += 2.0 * std::norm(A(i, j));
    if (std::sqrt(off) <= thresh) break;

    for (int p = 0; p < n - 1; p++) {
      for (int q = p + 1; q < n; q++) {
        cplx g = A(p, q);
        double ag = std::abs(g);
        if (ag <= 1e-300) continue;
        cplx u = g / ag;  // phase, so g = ag * u
        double app = A(p, p).real(), aqq = A(q, q).real();
        double beta = (aqq - app) / (2.0 * ag);
        double t = (beta >= 0.0 ? 1.0 : -1.0) / (std::abs(beta) + std::hypot(1.0, beta));
        double c = 1.0 / std::hypot(1.0, t);
        double s = t * c;

        // A <- J^* A J with J[p,p]=c, J[p,q]=s*u, J[q,p]=-s*conj(u), J[q,q]=c
        for (int k = 0; k < n; k++) {
          if (k == p || k == q) continue;
          cplx akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * std::conj(u) * akq;
          A(k, q) = s * u * akp + c * akq;
          A(p, k) = std::conj(A(k, p));
          A(q, k) = std::conj(A(k, q));
        }
        A(p, p) = c * c * app + s * s * aqq - 2.0 * s * c * ag;
        A(q, q) = s * s * app + c * c * aqq + 2.0 * s * c * ag;
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        if (v) {
          for (int k = 0; k < n; k++) {
            cplx vkp = v[k * n + p], vkq = v[k * n + q];
            v[k * n + p] = c * vkp - s * std::conj(u) * vkq;
            v[k * n + q] = s * u * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; i++) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return A(x, x).real() < A(y, y).real(); });
  std::vector<double> wv(n);
  for (int i = 0; i < n; i++) wv[i] = A(order[i], order[i]).real();
  for (int i = 0; i < n; i++) w[i] = wv[i];
  if (v) {
    std::vector<cplx> tmp(n * n);
    for (int j = 0; j < n; j++)
      for (int i = 0; i < n; i++) tmp[i * n + j] = v[i * n + order[j]];
    std::copy(tmp.begin(), tmp.end(), v);
  }
}

void block_eig(const Block& b, double* w, Block* v) {
  require(block_finite(b), ErrorKind::invalid_input, "non-finite block");
  Block work = b;
  Block vec(b.r);
  jacobi_hermitian_eig(work.a.data(), b.r, w, v ? vec.a.data() : nullptr);
  if (v) *v = vec;
}

double block_op_norm(const Block& b) {
  require(block_finite(b), ErrorKind::invalid_input, "non-finite block");
  Block h = adj_mul(b, b);
  double w[kMaxR];
  block_eig(h, w, nullptr);
  return std::sqrt(std::max(0.0, w[b.r - 1]));
}

void block_svd(const Block& b, Block& u, double* sigma, Block& v) {
  int r = b.r;
  Block h = adj_mul(b, b);
  double w[kMaxR];
  Block vv;
  block_eig(h, w, &vv);

  // descending singular values
  u = Block(r);
  v = Block(r);
  for (int j = 0; j < r; j++) {
    int src = r - 1 - j;
    sigma[j] = std::sqrt(std::max(0.0, w[src]));
    for (int i = 0; i < r; i++) v.at(i, j) = vv.at(i, src);
  }
  double smax = std::max(sigma[0], 1e-300);
  for (int j = 0; j < r; j++) {
    if (sigma[j] > 1e-13 * smax) {
      for (int i = 0; i < r; i++) {
        cplx s = 0.0;
        for (int k = 0; k < r; k++) s += b.at(i, k) * v.at(k, j);
        u.at(i, j) = s / sigma[j];
      }
    } else {
      // complete u to a unitary: Gram-Schmidt a basis vector against the
      // columns already placed
      for (int e = 0; e < r; e++) {
        cplx col[kMaxR];
        for (int i = 0; i < r; i++) col[i] = (i == e) ? 1.0 : 0.0;
        for (int jj = 0; jj < j; jj++) {
          cplx dot = 0.0;
          for (int i = 0; i < r; i++) dot += std::conj(u.at(i, jj)) * col[i];
          for (int i = 0; i < r; i++) col[i] -= dot * u.at(i, jj);
        }
        double nrm = 0.0;
        for (int i = 0; i < r; i++) nrm += std::norm(col[i]);
        nrm = std::sqrt(nrm);
        if (nrm > 1e-6) {
          for (int i = 0; i < r; i++) u.at(i, j) = col[i] / nrm;
          break;
        }
      }
    }
  }
}

void unitary_split(const Block& d, double& w, Block& q1, Block& q2) {
  require(block_finite(d), ErrorKind::invalid_input, "non-finite block");
  w = block_op_norm(d);
  require(w > 0.0, ErrorKind::degenerate, "unitary_split of a zero block");
  int r = d.r;
  Block dn = d;
  dn *= cplx(1.0 / w);
  Block u, v;
  double sigma[kMaxR];
  block_svd(dn, u, sigma, v);
  q1 = Block(r);
  q2 = Block(r);
  for (int j = 0; j < r; j++) {
    double cth = std::clamp(sigma[j], 0.0, 1.0);
    double th = std::acos(cth);
    cplx e1(std::cos(th), std::sin(th)), e2 = std::conj(e1);
    // accumulate u * diag(e) * v^*
    for (int i = 0; i < r; i++)
      for (int k = 0; k < r; k++) {
        cplx uv = u.at(i, j) * std::conj(v.at(k, j));
        q1.at(i, k) += e1 * uv;
        q2.at(i, k) += e2 * uv;
      }
  }
}

static Block eig_transform(const Block& h, double (*f)(double), const char* what) {
  int r = h.r;
  double w[kMaxR];
  Block v;
  block_eig(h, w, &v);
  Block out(r);
  for (int j = 0; j < r; j++) {
    double fw = f(w[j]);
    require(std::isfinite(fw), ErrorKind::numerical,
            std::string(what) + ": eigenvalue out of domain");
    for (int i = 0; i < r; i++)
      for (int k = 0; k < r; k++)
        out.at(i, k) += fw * v.at(i, j) * std::conj(v.at(k, j));
  }
  return out;
}

Block psd_sqrt(const Block& h) {
  return eig_transform(h, [](double x) { return std::sqrt(std::max(0.0, x)); }, "psd_sqrt");
}

Block psd_inv_sqrt(const Block& h) {
  double w[kMaxR];
  Block v;
  block_eig(h, w, &v);
  require(w[0] > 0.0, ErrorKind::numerical, "psd_inv_sqrt: block not positive definite");
  Block out(h.r);
  for (int j = 0; j < h.r; j++) {
    double fw = 1.0 / std::sqrt(w[j]);
    for (int i = 0; i < h.r; i++)
      for (int k = 0; k < h.r; k++)
        out.at(i, k) += fw * v.at(i, j) * std::conj(v.at(k, j));
  }
  return out;
}

Block hermitian_inverse(const Block& h) {
  double w[kMaxR];
  Block v;
  block_eig(h, w, &v);
  double amax = 0.0;
  for (int j = 0; j < h.r; j++) amax = std::max(amax, std::abs(w[j]));
  Block out(h.r);
  for (int j = 0; j < h.r; j++) {
    require(std::abs(w[j]) > 1e-14 * std::max(amax, 1e-300), ErrorKind::numerical,
            "hermitian_inverse: singular block");
    double fw = 1.0 / w[j];
    for (int i = 0; i < h.r; i++)
      for (int k = 0; k < h.r; k++)
        out.at(i, k) += fw * v.at(i, j) * std::conj(v.at(k, j));
  }
  return out;
}

bool cholesky_upper(const Block& h, Block& rfac) {
  int r = h.r;
  rfac = Block(r);
  for (int i = 0; i < r; i++) {
    double d = h.at(i, i).real();
    for (int k = 0; k < i; k++) d -= std::norm(rfac.at(k, i));
    if (!(d > 0.0)) return false;
    double rii = std::sqrt(d);
    rfac.at(i, i) = rii;
    for (int j = i + 1; j < r; j++) {
      cplx s = h.at(i, j);
      for (int k = 0; k < i; k++) s -= std::conj(rfac.at(k, i)) * rfac.at(k, j);
      rfac.at(i, j) = s / rii;
    }
  }
  return true;
}

void cholesky_solve(const Block& rfac, cplx* x) {
  int r = rfac.r;
  // R^* y = x (forward)
  for (int i = 0; i < r; i++) {
    cplx s = x[i];
    for (int k = 0; k < i; k++) s -= std::conj(rfac.at(k, i)) * x[k];
    x[i] = s / rfac.at(i, i).real();
  }
  // R x = y (backward)
  for (int i = r - 1; i >= 0; i--) {
    cplx s = x[i];
    for (int k = i + 1; k < r; k++) s -= rfac.at(i, k) * x[k];
    x[i] = s / rfac.at(i, i).real();
  }
}

}  // namespace bdd
