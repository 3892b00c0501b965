#include "bdd/resparsify.hpp"

#include <cmath>
#include <utility>

#include "bdd/error.hpp"
#include "bdd/rng.hpp"

namespace bdd {

namespace {

// y[u] += q h for the r-vector h of one edge side
void edge_push(cplx* y, const Block& q, const cplx* h, int r) {
  for (int a = 0; a < r; a++) {
    cplx s = 0.0;
    for (int b = 0; b < r; b++) s += q.a[static_cast<size_t>(a) * r + b] * h[b];
    y[a] += s;
  }
}

// accumulates |q_u^* y[u] + q_v^* y[v]|^2 per block column into tau
void accumulate_sketch(const UnitaryTransferMatrix& b, const BlockVector& y,
                       std::vector<double>& tau) {
  const int r = b.r;
  for (size_t e = 0; e < b.edges.size(); e++) {
    const TransferEdge& ed = b.edges[e];
    const cplx* yu = y.at(ed.u);
    const cplx* yv = y.at(ed.v);
    double acc = 0.0;
    for (int j = 0; j < r; j++) {
      cplx s = 0.0;
      for (int a = 0; a < r; a++) {
        s += std::conj(ed.qu.a[static_cast<size_t>(a) * r + j]) * yu[a];
        s += std::conj(ed.qv.a[static_cast<size_t>(a) * r + j]) * yv[a];
      }
      acc += std::norm(s);
    }
    tau[e] += acc;
  }
}

}  // namespace

LeverageEstimates estimate_block_leverage(const UnitaryTransferMatrix& b,
                                          const BlockDiagonalMatrix& x,
                                          const UnitaryTransferMatrix& c,
                                          const SolverApply& w, int jl_rows,
                                          uint64_t seed) {
  require(jl_rows >= 1, ErrorKind::parameter,
          "leverage estimate: sketch width must be positive");
  require(b.n == x.n && b.r == x.r, ErrorKind::invalid_input,
          "leverage estimate: dimension mismatch");
  const int n = x.n, r = x.r;

  LeverageEstimates est;
  est.jl_rows = jl_rows;
  est.seed = seed;
  est.tau.assign(b.edges.size(), 0.0);
  if (b.edges.empty()) return est;

  std::vector<Block> sx(n, Block(r));
  for (int i = 0; i < n; i++) sx[i] = psd_sqrt(x.get(i));

  // complex Gaussian entries with E|g|^2 = 1/jl_rows make the sketch norm
  // preserving in expectation
  const double scale = 1.0 / std::sqrt(2.0 * jl_rows);
  Rng base(seed);
  Rng rx = base.split(1);
  Rng rc = base.split(2);

  for (int t = 0; t < jl_rows; t++) {
    // sqrt(X) branch: one row of G sqrt(X) Q, transported back as Q sqrt(X) g
    BlockVector xg = BlockVector::zero(n, r);
    for (int i = 0; i < n; i++) {
      cplx g[kMaxR];
      for (int a = 0; a < r; a++)
        g[a] = cplx(rx.next_gaussian() * scale, rx.next_gaussian() * scale);
      edge_push(xg.at(i), sx[i], g, r);
    }
    accumulate_sketch(b, w(xg), est.tau);

    // C branch: Q C g over the sampled edge space
    if (!c.edges.empty()) {
      BlockVector cg = BlockVector::zero(n, r);
      for (const TransferEdge& ed : c.edges) {
        cplx h[kMaxR];
        for (int a = 0; a < r; a++)
          h[a] = cplx(rc.next_gaussian() * scale, rc.next_gaussian() * scale);
        edge_push(cg.at(ed.u), ed.qu, h, r);
        edge_push(cg.at(ed.v), ed.qv, h, r);
      }
      accumulate_sketch(b, w(cg), est.tau);
    }
  }
  return est;
}

UnitaryTransferMatrix sample_by_scores(const UnitaryTransferMatrix& b,
                                       const std::vector<double>& tau, double epsilon,
                                       uint64_t seed, double c_s) {
  require(tau.size() == b.edges.size(), ErrorKind::invalid_input,
          "sample: one score per block column");
  require(std::isfinite(epsilon) && epsilon > 0.0 && epsilon <= 1.0,
          ErrorKind::parameter, "sample: accuracy must lie in (0, 1]");
  require(std::isfinite(c_s) && c_s > 0.0, ErrorKind::parameter,
          "sample: oversampling constant must be positive");

  const double lg = std::log(static_cast<double>(std::max(b.n, 2)));
  UnitaryTransferMatrix out;
  out.n = b.n;
  out.r = b.r;
  Rng rng(seed);
  for (size_t e = 0; e < b.edges.size(); e++) {
    require(std::isfinite(tau[e]) && tau[e] >= 0.0, ErrorKind::invalid_input,
            "sample: scores must be nonnegative");
    double p = std::min(1.0, c_s * tau[e] * lg / (epsilon * epsilon));
    if (p <= 0.0) continue;
    Rng re = rng.split(static_cast<uint64_t>(e));
    if (re.next_double() >= p) continue;
    TransferEdge kept = b.edges[e];
    double s = 1.0 / std::sqrt(p);
    kept.qu *= cplx(s);
    kept.qv *= cplx(s);
    kept.w /= p;
    out.edges.push_back(kept);
  }
  return out;
}

BlockSparseMatrix sparsify(const BlockSparseMatrix& m, double epsilon, int k,
                           const InnerSolverFactory& factory, uint64_t seed, double c_s) {
  require(m.hermitian, ErrorKind::invalid_input, "sparsify: matrix must be Hermitian");
  require(std::isfinite(epsilon) && epsilon > 0.0 && epsilon <= 1.0,
          ErrorKind::parameter, "sparsify: accuracy must lie in (0, 1]");
  require(k >= 1, ErrorKind::parameter,
          "sparsify: undersampling factor must be at least 1");
  require(is_bdd(m), ErrorKind::precondition, "sparsify: matrix must be bDD");

  BlockDiagonalMatrix x;
  UnitaryTransferMatrix b;
  factorize_bdd(m, x, b);
  // the estimator whitens through sqrt(X); a singular slack block means the
  // caller forgot to pad
  for (int i = 0; i < m.n; i++) {
    double wv[kMaxR];
    block_eig(x.get(i), wv, nullptr);
    require(wv[0] > 0.0, ErrorKind::precondition,
            "sparsify: diagonal slack must be positive definite (pad first)");
  }

  const int mm = static_cast<int>(b.edges.size());
  if (mm == 0) return diag_to_bsm(x);

  Rng rng(seed);
  UnitaryTransferMatrix c;
  c.n = b.n;
  c.r = b.r;
  SolverApply w;
  if (k >= mm) {
    // nothing to undersample: the inner matrix is X itself, invert exactly
    std::vector<Block> xinv(m.n, Block(m.r));
    for (int i = 0; i < m.n; i++) xinv[i] = hermitian_inverse(x.get(i));
    const int r = m.r;
    w = [xi = std::move(xinv), r](const BlockVector& v) {
      BlockVector out = BlockVector::zero(v.n, r);
      for (int i = 0; i < v.n; i++) edge_push(out.at(i), xi[i], v.at(i), r);
      return out;
    };
  } else {
    for (int e : rng.split(11).subset(mm, mm / k)) c.edges.push_back(b.edges[e]);
    w = factory(assemble_from_factors(x, c));
  }

  int jl = std::max(
      1, static_cast<int>(std::ceil(24.0 * std::log(static_cast<double>(std::max(m.n, 2))))));
  LeverageEstimates lev =
      estimate_block_leverage(b, x, c, w, jl, rng.split(12).next_u64());
  UnitaryTransferMatrix btil =
      sample_by_scores(b, lev.tau, epsilon, rng.split(13).next_u64(), c_s);
  return assemble_from_factors(x, btil);
}

}  // namespace bdd
