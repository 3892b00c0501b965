#include "bdd/subset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdd/error.hpp"
#include "bdd/rng.hpp"

namespace bdd {

namespace {

// one candidate round: sample F', keep dominated rows
std::vector<int> filter_round(const BlockSparseMatrix& m,
                              const std::vector<double>& offsums, double alpha,
                              int fp_size, Rng& rng, std::vector<char>& mark) {
  std::vector<int> fprime = rng.subset(m.n, fp_size);
  for (int i : fprime) mark[i] = 1;
  std::vector<int> f;
  for (int i : fprime) {
    double inner = 0.0;
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; k++) {
      int j = m.col[k];
      if (j != i && mark[j]) inner += m.bnorm[k];
    }
    if (offsums[i] >= (1.0 + alpha) * inner) f.push_back(i);
  }
  for (int i : fprime) mark[i] = 0;
  return f;
}

}  // namespace

SubsetResult bdd_subset(const BlockSparseMatrix& m, double alpha, uint64_t seed) {
  require(alpha >= 0.0, ErrorKind::parameter, "alpha must be nonnegative");
  BddReport rep = bdd_report(m, 0.0);
  require(rep.ok, ErrorKind::precondition, "bdd_subset: matrix is not bDD");

  int n = m.n;
  SubsetResult out;
  out.seed = seed;
  std::vector<double> offsums = offdiag_norm_sums(m);
  Rng rng(seed);
  std::vector<char> mark(n, 0);

  if (static_cast<double>(n) < 8.0 * (1.0 + alpha)) {
    // small instance: the whole set if it qualifies, else a filtered sample
    if (bdd_report(m, alpha).ok) {
      out.f.resize(n);
      for (int i = 0; i < n; i++) out.f[i] = i;
      out.iterations = 1;
      return out;
    }
    int fp_size = std::max(1, static_cast<int>(n / (4.0 * (1.0 + alpha))));
    for (int iter = 1; iter <= 100; iter++) {
      std::vector<int> f = filter_round(m, offsums, alpha, fp_size, rng, mark);
      if (!f.empty()) {
        out.f = std::move(f);
        out.iterations = iter;
        return out;
      }
    }
    fail(ErrorKind::improbable,
         "bdd_subset: no nonempty subset in 100 rounds (n=" + std::to_string(n) + ")");
  }

  int fp_size = static_cast<int>(std::ceil(n / (4.0 * (1.0 + alpha))));
  double need = n / (8.0 * (1.0 + alpha));
  for (int iter = 1; iter <= 100; iter++) {
    std::vector<int> f = filter_round(m, offsums, alpha, fp_size, rng, mark);
    if (static_cast<double>(f.size()) >= need) {
      out.f = std::move(f);
      out.iterations = iter;
      return out;
    }
  }
  fail(ErrorKind::improbable,
       "bdd_subset: kept fewer than " + std::to_string(need) +
           " rows in 100 rounds (n=" + std::to_string(n) +
           ", alpha=" + std::to_string(alpha) + ")");
}

SubsetResult bdd_subset_low_degree(const BlockSparseMatrix& m, double alpha,
                                   uint64_t seed) {
  require(alpha >= 0.0, ErrorKind::parameter, "alpha must be nonnegative");
  int n = m.n;
  double avg = static_cast<double>(m.nnz_blocks()) / std::max(n, 1);
  std::vector<int> kept;
  for (int i = 0; i < n; i++) {
    int deg = m.row_ptr[i + 1] - m.row_ptr[i];
    if (static_cast<double>(deg) <= 2.0 * avg) kept.push_back(i);
  }
  // fewer than half the rows can exceed twice the average, so kept >= n/2
  BlockSparseMatrix sub = submatrix(m, kept, kept);
  SubsetResult inner = bdd_subset(sub, alpha, seed);
  SubsetResult out;
  out.seed = seed;
  out.iterations = inner.iterations;
  out.f.reserve(inner.f.size());
  for (int i : inner.f) out.f.push_back(kept[i]);
  return out;
}

}  // namespace bdd
