#include "bdd/clique.hpp"

#include <algorithm>
#include <cmath>

#include "bdd/error.hpp"

namespace bdd {

namespace {

// nonzero entries with cached operator norms; zero-norm blocks take no part
// in any product Laplacian and reappear only as empty rows of the outputs
struct Support {
  std::vector<int> idx;  // original indices, ascending
  std::vector<Block> blk;
  std::vector<double> w;  // operator norms, all > 0
};

void validate_demand(const BlockDemandVector& d) {
  require(d.n >= 1, ErrorKind::invalid_input, "demand vector: empty dimension");
  require(d.r >= 1 && d.r <= kMaxR, ErrorKind::invalid_input,
          "demand vector: block size out of range");
  int prev = -1;
  for (const auto& [i, b] : d.blocks) {
    require(i > prev && i < d.n, ErrorKind::invalid_input,
            "demand vector: indices must be ascending and in range");
    require(b.r == d.r, ErrorKind::invalid_input, "demand vector: block size mismatch");
    require(block_finite(b), ErrorKind::invalid_input, "demand vector: non-finite block");
    prev = i;
  }
}

Support demand_support(const BlockDemandVector& d) {
  Support s;
  for (const auto& [i, b] : d.blocks) {
    double w = block_op_norm(b);
    if (w == 0.0) continue;
    s.idx.push_back(i);
    s.blk.push_back(b);
    s.w.push_back(w);
  }
  return s;
}

std::vector<char> side_mask(int n, const std::vector<int>& f) {
  std::vector<int> fs = f;
  std::sort(fs.begin(), fs.end());
  require(std::adjacent_find(fs.begin(), fs.end()) == fs.end(), ErrorKind::invalid_input,
          "bipartite demand: duplicate index");
  std::vector<char> in_f(n, 0);
  for (int i : fs) {
    require(i >= 0 && i < n, ErrorKind::invalid_input, "bipartite demand: index out of range");
    in_f[i] = 1;
  }
  return in_f;
}

Block scaled_product(const Block& x, const Block& y, double s) {
  Block b = mul_adj(x, y);
  b *= cplx(s);
  return b;
}

}  // namespace

BlockDemandVector make_demand(int n, int r, std::vector<std::pair<int, Block>> blocks) {
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  BlockDemandVector d;
  d.n = n;
  d.r = r;
  d.blocks = std::move(blocks);
  validate_demand(d);
  d.blocks.erase(std::remove_if(d.blocks.begin(), d.blocks.end(),
                                [](const auto& e) { return is_zero(e.second); }),
                 d.blocks.end());
  return d;
}

BlockSparseMatrix product_block_laplacian(const BlockDemandVector& d) {
  validate_demand(d);
  Support s = demand_support(d);
  int m = static_cast<int>(s.idx.size());
  BsmBuilder bld(d.n, d.r);
  if (m >= 2) {
    // diagonal accumulated in ascending-k order so the sparsifier's exact
    // regime, which sums the same products edge by edge, matches bit for bit
    for (int a = 0; a < m; a++) {
      double deg = 0.0;
      for (int b = 0; b < m; b++)
        if (b != a) deg += s.w[a] * s.w[b];
      bld.add(s.idx[a], s.idx[a], Block::identity(d.r, deg));
    }
    for (int a = 0; a < m; a++)
      for (int b = a + 1; b < m; b++)
        bld.add_sym(s.idx[a], s.idx[b], scaled_product(s.blk[a], s.blk[b], -1.0));
  }
  return bld.finish();
}

BlockSparseMatrix bipartite_product_block_laplacian(const BlockDemandVector& d,
                                                    const std::vector<int>& f) {
  validate_demand(d);
  std::vector<char> in_f = side_mask(d.n, f);
  Support s = demand_support(d);
  int m = static_cast<int>(s.idx.size());
  std::vector<int> sa, sb;  // support positions by side, ascending
  for (int p = 0; p < m; p++) (in_f[s.idx[p]] ? sa : sb).push_back(p);
  BsmBuilder bld(d.n, d.r);
  if (!sa.empty() && !sb.empty()) {
    for (int a : sa) {
      double deg = 0.0;
      for (int b : sb) deg += s.w[a] * s.w[b];
      bld.add(s.idx[a], s.idx[a], Block::identity(d.r, deg));
    }
    for (int b : sb) {
      double deg = 0.0;
      for (int a : sa) deg += s.w[a] * s.w[b];
      bld.add(s.idx[b], s.idx[b], Block::identity(d.r, deg));
    }
    for (int a : sa)
      for (int b : sb)
        bld.add_sym(s.idx[a], s.idx[b], scaled_product(s.blk[a], s.blk[b], -1.0));
  }
  return bld.finish();
}

BlockSparseMatrix clique_sparsification(const BlockDemandVector& d, double epsilon,
                                        uint64_t seed) {
  validate_demand(d);
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter,
          "clique sparsification: epsilon must be positive");
  Support s = demand_support(d);
  int m = static_cast<int>(s.idx.size());
  require(m >= 2, ErrorKind::precondition,
          "clique sparsification: needs at least two nonzero blocks");

  WeightedGraph h = weighted_expander(s.w, epsilon, seed);
  std::vector<double> deg(m, 0.0);
  BsmBuilder bld(d.n, d.r);
  for (const auto& e : h.edges) {
    require(e.u != e.v, ErrorKind::numerical, "clique sparsification: self-loop from expander");
    deg[e.u] += e.w;
    deg[e.v] += e.w;
    double scl = -(e.w / (s.w[e.u] * s.w[e.v]));
    bld.add_sym(s.idx[e.u], s.idx[e.v], scaled_product(s.blk[e.u], s.blk[e.v], scl));
  }
  for (int a = 0; a < m; a++)
    if (deg[a] > 0.0) bld.add(s.idx[a], s.idx[a], Block::identity(d.r, deg[a]));
  return bld.finish();
}

BlockSparseMatrix bipartite_clique_sparsification(const BlockDemandVector& d,
                                                  const std::vector<int>& f,
                                                  double epsilon, uint64_t seed) {
  validate_demand(d);
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter,
          "bipartite clique sparsification: epsilon must be positive");
  std::vector<char> in_f = side_mask(d.n, f);
  Support s = demand_support(d);
  int m = static_cast<int>(s.idx.size());
  std::vector<int> sa, sb;
  for (int p = 0; p < m; p++) (in_f[s.idx[p]] ? sa : sb).push_back(p);
  require(!sa.empty() && !sb.empty(), ErrorKind::precondition,
          "bipartite clique sparsification: needs a nonzero block on each side");
  int na = static_cast<int>(sa.size());

  std::vector<double> wa, wb;
  wa.reserve(sa.size());
  wb.reserve(sb.size());
  for (int a : sa) wa.push_back(s.w[a]);
  for (int b : sb) wb.push_back(s.w[b]);
  WeightedGraph h = weighted_bipartite_expander(wa, wb, epsilon, seed);

  // expander vertices [0, na) are side-f support positions, the rest side-c
  std::vector<double> deg(m, 0.0);
  BsmBuilder bld(d.n, d.r);
  for (const auto& e : h.edges) {
    require(e.u < na && e.v >= na, ErrorKind::numerical,
            "bipartite clique sparsification: edge inside one side");
    int a = sa[e.u], b = sb[e.v - na];
    deg[a] += e.w;
    deg[b] += e.w;
    double scl = -(e.w / (s.w[a] * s.w[b]));
    bld.add_sym(s.idx[a], s.idx[b], scaled_product(s.blk[a], s.blk[b], scl));
  }
  for (int p = 0; p < m; p++)
    if (deg[p] > 0.0) bld.add(s.idx[p], s.idx[p], Block::identity(d.r, deg[p]));
  return bld.finish();
}

WeightedGraph k2_cover(const WeightedGraph& g) {
  std::vector<GraphEdge> edges;
  edges.reserve(g.edges.size() * 4);
  for (const auto& e : g.edges) {
    require(e.u != e.v, ErrorKind::invalid_input, "k2 cover: self-loops unsupported");
    for (int a = 0; a < 2; a++)
      for (int b = 0; b < 2; b++) edges.push_back({2 * e.u + a, 2 * e.v + b, e.w});
  }
  return canonical_graph(2 * g.n, std::move(edges));
}

}  // namespace bdd
