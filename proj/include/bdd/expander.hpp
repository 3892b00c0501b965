#pragma once

// Explicit expander machinery: Cayley-graph Ramanujan constructions over
// PSL/PGL(2, Z/qZ), parity conversion (double cover, collapse), certified
// random regular graphs, and the weighted expander constructions that
// sparsify product demand graphs.

#include <cstdint>
#include <string>
#include <vector>

#include "bdd/dense.hpp"

namespace bdd {

struct GraphEdge {
  int u = 0, v = 0;
  double w = 1.0;
};

// Undirected weighted graph. Canonical form: u <= v, sorted, parallel edges
// merged by summing. A self-loop (u, u, w) adds w to the adjacency diagonal
// and to the weighted degree, so it never contributes to the Laplacian.
struct WeightedGraph {
  int n = 0;
  std::vector<GraphEdge> edges;
};

// validates, sorts, merges parallel edges
WeightedGraph canonical_graph(int n, std::vector<GraphEdge> edges);
std::vector<double> weighted_degrees(const WeightedGraph& g);
DenseHermitian graph_adjacency(const WeightedGraph& g);
DenseHermitian graph_laplacian(const WeightedGraph& g);
WeightedGraph scale_graph(const WeightedGraph& g, double s);
WeightedGraph complete_graph(int n);
// K_{h,h} with parts {0..h-1} and {h..2h-1}
WeightedGraph complete_bipartite_graph(int h);
// complete graph with weight d_i * d_j on edge (i, j)
WeightedGraph product_demand_graph(const std::vector<double>& d);
WeightedGraph bipartite_product_demand_graph(const std::vector<double>& da,
                                             const std::vector<double>& db);

// largest |eigenvalue| of the adjacency matrix after removing the trivial
// ones (top; also bottom when bipartite); dense, so size-capped
double nontrivial_adjacency_bound(const WeightedGraph& g, bool bipartite);

// max |ln(mu / n_prime)| over the nonzero Laplacian eigenvalues of g, which
// equals the approximation accuracy against the complete graph on n_prime
// vertices; requires g connected on n_prime vertices
double measured_complete_eps(const WeightedGraph& g, int n_prime);
// same against K_{h,h}; parts must be {0..h-1}, {h..2h-1}
double measured_bipartite_eps(const WeightedGraph& g, int h);

struct ExpanderCertificate {
  double degree = 0.0;
  double lambda_bound = 0.0;   // certified bound on nontrivial |eigenvalue|
  std::string method;          // "lps" or "random-certified"
};

// smallest prime p in [lo, hi] with p = 1 mod 4; 0 when none exists
long long find_prime_1mod4(long long lo, long long hi);

struct LpsGraph {
  WeightedGraph g;
  ExpanderCertificate cert;  // degree p+1, lambda 2 sqrt(p)
  bool bipartite = false;    // generator determinant is a non-residue mod q
  long long p = 0, q = 0;
};

// Cayley graph over PSL(2, Z/qZ) (p a quadratic residue mod q, q(q^2-1)/2
// vertices, non-bipartite) or PGL(2, Z/qZ) (non-residue, q(q^2-1) vertices,
// bipartite with the residue classes as parts {0..h-1}, {h..2h-1});
// generators come from the p+1 representations p = a0^2+a1^2+a2^2+a3^2 with
// a0 odd positive and a1, a2, a3 even
LpsGraph lps_ramanujan(long long p, long long q);

// bipartite lift with adjacency [[0, A], [A^T, 0]]; spectrum is the union of
// the spectra of A and -A, so the nontrivial bound carries over
WeightedGraph double_cover(const WeightedGraph& g);

// identify the two parts of a bipartite graph (parts {0..h-1}, {h..2h-1})
// along the bijection pi: second part -> first part; weighted degrees double
// and the nontrivial eigenvalue bound at most doubles
WeightedGraph collapse(const WeightedGraph& g, const std::vector<int>& pi);

struct ScaledExpander {
  int n_prime = 0;          // vertex count (per part when bipartite)
  WeightedGraph g;          // scaled by n'/d so the target is the unit clique
  double achieved_eps = 0.0;
  bool exact = false;       // exact complete graph, achieved_eps = 0
};

// approximation of the complete graph on some n' in [n, 8n] (exactly n on
// the random / exact paths); Ramanujan Cayley graphs are used when the
// accuracy window admits one, certified random regular graphs otherwise
ScaledExpander expander_approx_complete(int n, double epsilon, uint64_t seed);
ScaledExpander expander_approx_bipartite(int n, double epsilon, uint64_t seed);

struct CertifiedExpander {
  WeightedGraph g;
  ExpanderCertificate cert;
};

// permutation-sum d-regular multigraph, resampled until the certified
// nontrivial eigenvalue bound is at most epsilon_target * d / (2 ln 2);
// dense certification up to 2500 vertices, deflated power method above
CertifiedExpander random_regular_certified(int n, int d, double epsilon_target,
                                           uint64_t seed);

// weighted graph approximating the product demand graph of d: vertices of
// high demand are split into unit-demand copies, an expander replaces the
// clique between the copies, stars reroute the low-demand vertices, and the
// copies are collapsed back
WeightedGraph weighted_expander(const std::vector<double>& d, double epsilon,
                                uint64_t seed);
WeightedGraph weighted_bipartite_expander(const std::vector<double>& da,
                                          const std::vector<double>& db,
                                          double epsilon, uint64_t seed);

}  // namespace bdd
