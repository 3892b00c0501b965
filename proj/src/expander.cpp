#include "bdd/expander.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <tuple>

#include "bdd/error.hpp"
#include "bdd/rng.hpp"

namespace bdd {
namespace {

constexpr long long kExactCliqueEdges = 4096;
constexpr long long kLpsVertexCap = 2'000'000;
constexpr int kDenseCertifyCap = 2500;
constexpr int kPowerIterations = 200;
constexpr int kMaxSampleAttempts = 50;
constexpr double kTwoLn2 = 2.0 * 0.6931471805599453;

}  // namespace

WeightedGraph canonical_graph(int n, std::vector<GraphEdge> edges) {
  require(n >= 0, ErrorKind::invalid_input, "graph: negative vertex count");
  for (auto& e : edges) {
    require(e.u >= 0 && e.u < n && e.v >= 0 && e.v < n, ErrorKind::invalid_input,
            "graph: edge endpoint out of range");
    require(std::isfinite(e.w) && e.w > 0.0, ErrorKind::invalid_input,
            "graph: edge weights must be positive and finite");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  WeightedGraph g;
  g.n = n;
  for (const auto& e : edges) {
    if (!g.edges.empty() && g.edges.back().u == e.u && g.edges.back().v == e.v)
      g.edges.back().w += e.w;
    else
      g.edges.push_back(e);
  }
  return g;
}

std::vector<double> weighted_degrees(const WeightedGraph& g) {
  std::vector<double> deg(g.n, 0.0);
  for (const auto& e : g.edges) {
    deg[e.u] += e.w;
    if (e.v != e.u) deg[e.v] += e.w;
  }
  return deg;
}

DenseHermitian graph_adjacency(const WeightedGraph& g) {
  require(g.n <= kDenseCap, ErrorKind::size_cap, "dense adjacency capped at N = 3000");
  DenseHermitian a(g.n);
  for (const auto& e : g.edges) {
    if (e.u == e.v) {
      a.at(e.u, e.u) += e.w;
    } else {
      a.at(e.u, e.v) += e.w;
      a.at(e.v, e.u) += e.w;
    }
  }
  return a;
}

DenseHermitian graph_laplacian(const WeightedGraph& g) {
  require(g.n <= kDenseCap, ErrorKind::size_cap, "dense Laplacian capped at N = 3000");
  DenseHermitian l(g.n);
  for (const auto& e : g.edges) {
    if (e.u == e.v) continue;  // self-loops cancel in D - A
    l.at(e.u, e.u) += e.w;
    l.at(e.v, e.v) += e.w;
    l.at(e.u, e.v) -= e.w;
    l.at(e.v, e.u) -= e.w;
  }
  return l;
}

WeightedGraph scale_graph(const WeightedGraph& g, double s) {
  require(std::isfinite(s) && s > 0.0, ErrorKind::parameter,
          "scale_graph: factor must be positive and finite");
  WeightedGraph out = g;
  for (auto& e : out.edges) e.w *= s;
  return out;
}

WeightedGraph complete_graph(int n) {
  require(n >= 0, ErrorKind::invalid_input, "complete_graph: negative size");
  WeightedGraph g;
  g.n = n;
  g.edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; i++)
    for (int j = i + 1; j < n; j++) g.edges.push_back({i, j, 1.0});
  return g;
}

WeightedGraph complete_bipartite_graph(int h) {
  require(h >= 0, ErrorKind::invalid_input, "complete_bipartite_graph: negative size");
  WeightedGraph g;
  g.n = 2 * h;
  g.edges.reserve(static_cast<size_t>(h) * h);
  for (int i = 0; i < h; i++)
    for (int j = 0; j < h; j++) g.edges.push_back({i, h + j, 1.0});
  return g;
}

WeightedGraph product_demand_graph(const std::vector<double>& d) {
  int n = static_cast<int>(d.size());
  for (double x : d)
    require(std::isfinite(x) && x > 0.0, ErrorKind::parameter,
            "product demand graph: demands must be positive");
  WeightedGraph g;
  g.n = n;
  g.edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; i++)
    for (int j = i + 1; j < n; j++) g.edges.push_back({i, j, d[i] * d[j]});
  return g;
}

WeightedGraph bipartite_product_demand_graph(const std::vector<double>& da,
                                             const std::vector<double>& db) {
  int na = static_cast<int>(da.size()), nb = static_cast<int>(db.size());
  for (double x : da)
    require(std::isfinite(x) && x > 0.0, ErrorKind::parameter,
            "product demand graph: demands must be positive");
  for (double x : db)
    require(std::isfinite(x) && x > 0.0, ErrorKind::parameter,
            "product demand graph: demands must be positive");
  WeightedGraph g;
  g.n = na + nb;
  g.edges.reserve(static_cast<size_t>(na) * nb);
  for (int i = 0; i < na; i++)
    for (int j = 0; j < nb; j++) g.edges.push_back({i, na + j, da[i] * db[j]});
  return g;
}

double nontrivial_adjacency_bound(const WeightedGraph& g, bool bipartite) {
  if (g.n < 2) return 0.0;
  std::vector<double> w;
  hermitian_eig(graph_adjacency(g), w, nullptr);
  int lo = bipartite ? 1 : 0, hi = g.n - 2;
  if (lo > hi) return 0.0;
  return std::max(std::abs(w[lo]), std::abs(w[hi]));
}

double measured_complete_eps(const WeightedGraph& g, int n_prime) {
  require(g.n == n_prime && n_prime >= 2, ErrorKind::invalid_input,
          "measured_complete_eps: vertex count mismatch");
  std::vector<double> w;
  hermitian_eig(graph_laplacian(g), w, nullptr);
  require(std::abs(w[0]) <= 1e-8 * n_prime, ErrorKind::numerical,
          "measured_complete_eps: Laplacian null space off");
  require(w[1] > 1e-8 * n_prime, ErrorKind::numerical,
          "measured_complete_eps: graph is not connected");
  double eps = 0.0;
  for (int i = 1; i < n_prime; i++)
    eps = std::max(eps, std::abs(std::log(w[i] / n_prime)));
  return eps;
}

double measured_bipartite_eps(const WeightedGraph& g, int h) {
  require(h >= 1 && g.n == 2 * h, ErrorKind::invalid_input,
          "measured_bipartite_eps: vertex count mismatch");
  for (const auto& e : g.edges)
    require(e.u < h && e.v >= h, ErrorKind::precondition,
            "measured_bipartite_eps: edge inside a part");
  std::vector<double> w;
  hermitian_eig(graph_laplacian(g), w, nullptr);
  require(std::abs(w[0]) <= 1e-8 * h, ErrorKind::numerical,
          "measured_bipartite_eps: Laplacian null space off");
  require(w[1] > 1e-8 * h, ErrorKind::numerical,
          "measured_bipartite_eps: graph is not connected");
  // K_{h,h} spectrum: 0, then h with multiplicity 2h-2, then 2h
  double eps = std::abs(std::log(w[2 * h - 1] / (2.0 * h)));
  for (int i = 1; i < 2 * h - 1; i++)
    eps = std::max(eps, std::abs(std::log(w[i] / h)));
  return eps;
}

// ---- number-theoretic helpers for the Cayley construction

namespace {

bool is_prime_ll(long long x) {
  if (x < 2) return false;
  for (long long f = 2; f * f <= x; f++)
    if (x % f == 0) return false;
  return true;
}

long long pow_mod(long long a, long long e, long long q) {
  long long r = 1 % q;
  a %= q;
  while (e > 0) {
    if (e & 1) r = r * a % q;
    a = a * a % q;
    e >>= 1;
  }
  return r;
}

int legendre(long long a, long long q) {
  a %= q;
  if (a < 0) a += q;
  if (a == 0) return 0;
  return pow_mod(a, (q - 1) / 2, q) == 1 ? 1 : -1;
}

long long inv_mod(long long a, long long q) { return pow_mod(a, q - 2, q); }

struct M2 {
  long long a, b, c, d;
};

M2 mmul(const M2& x, const M2& y, long long q) {
  return {(x.a * y.a + x.b * y.c) % q, (x.a * y.b + x.b * y.d) % q,
          (x.c * y.a + x.d * y.c) % q, (x.c * y.b + x.d * y.d) % q};
}

// projective representative: first nonzero coordinate scaled to 1
M2 canon(const M2& m, long long q) {
  long long lead = m.a ? m.a : (m.b ? m.b : (m.c ? m.c : m.d));
  long long s = inv_mod(lead, q);
  return {m.a * s % q, m.b * s % q, m.c * s % q, m.d * s % q};
}

uint64_t pack(const M2& m, long long q) {
  return ((static_cast<uint64_t>(m.a) * q + m.b) * q + m.c) * q + m.d;
}

long long det_mod(const M2& m, long long q) {
  long long d = (m.a * m.d - m.b * m.c) % q;
  return d < 0 ? d + q : d;
}

// quaternion representations p = a0^2 + a1^2 + a2^2 + a3^2, a0 odd positive,
// a1, a2, a3 even; exactly p + 1 of them when p = 1 mod 4
long long even_floor_sqrt(long long r) {
  long long e = static_cast<long long>(std::sqrt(static_cast<double>(r)));
  while (e * e > r) e--;
  while ((e + 1) * (e + 1) <= r) e++;
  return (e % 2 == 0) ? e : e - 1;  // largest even value with square <= r
}

std::vector<std::array<long long, 4>> quaternion_solutions(long long p) {
  std::vector<std::array<long long, 4>> out;
  for (long long a0 = 1; a0 * a0 <= p; a0 += 2) {
    long long r1 = p - a0 * a0;
    long long e1 = even_floor_sqrt(r1);
    for (long long a1 = -e1; a1 <= e1; a1 += 2) {
      long long r2 = r1 - a1 * a1;
      long long e2 = even_floor_sqrt(r2);
      for (long long a2 = -e2; a2 <= e2; a2 += 2) {
        long long r3 = r2 - a2 * a2;
        long long a3 = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(r3))));
        if (a3 * a3 == r3 && (a3 % 2) == 0) {
          out.push_back({a0, a1, a2, a3});
          if (a3 != 0) out.push_back({a0, a1, a2, -a3});
        }
      }
    }
  }
  return out;
}

}  // namespace

long long find_prime_1mod4(long long lo, long long hi) {
  long long start = std::max(lo, 5LL);
  long long first = start + ((1 - start) % 4 + 4) % 4;  // first x >= start, x = 1 mod 4
  for (long long x = first; x <= hi; x += 4)
    if (is_prime_ll(x)) return x;
  return 0;
}

LpsGraph lps_ramanujan(long long p, long long q) {
  require(is_prime_ll(p) && p % 4 == 1, ErrorKind::parameter,
          "lps_ramanujan: p must be a prime congruent to 1 mod 4");
  require(is_prime_ll(q) && q % 4 == 1, ErrorKind::parameter,
          "lps_ramanujan: q must be a prime congruent to 1 mod 4");
  require(p != q, ErrorKind::parameter, "lps_ramanujan: p and q must differ");

  bool bipartite = legendre(p, q) == -1;  // generators have non-residue determinant
  long long order = q * (q * q - 1);      // |PGL(2, q)|
  long long nvert = bipartite ? order : order / 2;
  require(nvert <= kLpsVertexCap, ErrorKind::size_cap,
          "lps_ramanujan: vertex count exceeds the construction cap");

  // sqrt(-1) mod q exists since q = 1 mod 4
  long long x = 0;
  for (long long t = 2; t < q; t++)
    if (t * t % q == q - 1) {
      x = t;
      break;
    }

  auto sols = quaternion_solutions(p);
  require(static_cast<long long>(sols.size()) == p + 1, ErrorKind::numerical,
          "lps_ramanujan: generator count does not match p + 1");
  std::vector<M2> gens;
  for (const auto& s : sols) {
    auto red = [&](long long v) { return ((v % q) + q) % q; };
    M2 g{red(s[0] + x * s[1]), red(s[2] + x * s[3]), red(-s[2] + x * s[3]),
         red(s[0] - x * s[1])};
    require(det_mod(g, q) == ((p % q) + q) % q, ErrorKind::numerical,
            "lps_ramanujan: generator determinant off");
    gens.push_back(canon(g, q));
  }

  // enumerate projective canonical forms directly: (1,b,c,d) with d != bc and
  // (0,1,c,d) with c != 0; restrict to residue determinants for PSL
  std::vector<M2> elems;
  elems.reserve(nvert);
  auto keep = [&](const M2& m) {
    return bipartite || legendre(det_mod(m, q), q) == 1;
  };
  for (long long c = 1; c < q; c++)
    for (long long d = 0; d < q; d++) {
      M2 m{0, 1, c, d};
      if (keep(m)) elems.push_back(m);
    }
  for (long long b = 0; b < q; b++)
    for (long long c = 0; c < q; c++)
      for (long long d = 0; d < q; d++) {
        if ((d - b * c) % q == 0) continue;
        M2 m{1, b, c, d};
        if (keep(m)) elems.push_back(m);
      }
  require(static_cast<long long>(elems.size()) == nvert, ErrorKind::numerical,
          "lps_ramanujan: group enumeration size off");

  // bipartite case: residue-determinant classes first, then the rest
  if (bipartite)
    std::stable_partition(elems.begin(), elems.end(),
                          [&](const M2& m) { return legendre(det_mod(m, q), q) == 1; });

  std::vector<std::pair<uint64_t, int>> lookup(elems.size());
  for (size_t i = 0; i < elems.size(); i++) lookup[i] = {pack(elems[i], q), static_cast<int>(i)};
  std::sort(lookup.begin(), lookup.end());

  std::vector<GraphEdge> edges;
  edges.reserve(elems.size() * gens.size() / 2);
  for (size_t k = 0; k < elems.size(); k++) {
    for (const auto& g : gens) {
      uint64_t key = pack(canon(mmul(elems[k], g, q), q), q);
      auto it = std::lower_bound(lookup.begin(), lookup.end(), std::make_pair(key, 0));
      require(it != lookup.end() && it->first == key, ErrorKind::numerical,
              "lps_ramanujan: product left the group");
      int t = it->second;
      if (t > static_cast<int>(k)) edges.push_back({static_cast<int>(k), t, 1.0});
    }
  }

  LpsGraph out;
  out.g = canonical_graph(static_cast<int>(nvert), std::move(edges));
  out.bipartite = bipartite;
  out.p = p;
  out.q = q;
  out.cert = {static_cast<double>(p + 1), 2.0 * std::sqrt(static_cast<double>(p)), "lps"};

  auto deg = weighted_degrees(out.g);
  for (double dg : deg)
    require(std::abs(dg - static_cast<double>(p + 1)) < 1e-9, ErrorKind::numerical,
            "lps_ramanujan: graph is not (p+1)-regular");
  if (bipartite) {
    long long h = nvert / 2;
    for (const auto& e : out.g.edges)
      require(e.u < h && e.v >= h, ErrorKind::numerical,
              "lps_ramanujan: edge does not cross the determinant classes");
  }
  return out;
}

WeightedGraph double_cover(const WeightedGraph& g) {
  std::vector<GraphEdge> edges;
  edges.reserve(g.edges.size() * 2);
  for (const auto& e : g.edges) {
    if (e.u == e.v) {
      edges.push_back({e.u, g.n + e.u, e.w});
    } else {
      edges.push_back({e.u, g.n + e.v, e.w});
      edges.push_back({e.v, g.n + e.u, e.w});
    }
  }
  return canonical_graph(2 * g.n, std::move(edges));
}

WeightedGraph collapse(const WeightedGraph& g, const std::vector<int>& pi) {
  require(g.n % 2 == 0, ErrorKind::precondition, "collapse: odd vertex count");
  int h = g.n / 2;
  require(static_cast<int>(pi.size()) == h, ErrorKind::parameter,
          "collapse: permutation size mismatch");
  std::vector<char> seen(h, 0);
  for (int t : pi) {
    require(t >= 0 && t < h && !seen[t], ErrorKind::parameter,
            "collapse: pi is not a bijection onto the first part");
    seen[t] = 1;
  }
  std::vector<GraphEdge> edges;
  edges.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    require(e.u < h && e.v >= h, ErrorKind::precondition,
            "collapse: edge inside a part");
    int t = pi[e.v - h];
    if (t == e.u)
      edges.push_back({e.u, e.u, 2.0 * e.w});  // loop counts twice in the degree
    else
      edges.push_back({e.u, t, e.w});
  }
  return canonical_graph(h, std::move(edges));
}

// ---- certified random regular graphs

namespace {

// largest |eigenvalue| of A - (d/n) J estimated by 200 power iterations;
// the constant vector is deflated exactly since the graph is d-regular
double power_lambda_estimate(const WeightedGraph& g, double d, Rng& rng) {
  int n = g.n;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; i++) x[i] = rng.next_gaussian();
  double lam = 0.0;
  for (int it = 0; it < kPowerIterations; it++) {
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (int i = 0; i < n; i++) x[i] -= mean;
    double nrm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (nrm <= 1e-300) {
      for (int i = 0; i < n; i++) x[i] = rng.next_gaussian();
      continue;
    }
    for (int i = 0; i < n; i++) x[i] /= nrm;
    std::fill(y.begin(), y.end(), 0.0);
    for (const auto& e : g.edges) {
      if (e.u == e.v) {
        y[e.u] += e.w * x[e.u];
      } else {
        y[e.u] += e.w * x[e.v];
        y[e.v] += e.w * x[e.u];
      }
    }
    double sum = std::accumulate(x.begin(), x.end(), 0.0);
    double shift = d / n * sum;
    for (int i = 0; i < n; i++) y[i] -= shift;
    lam = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    x.swap(y);
  }
  return lam;
}

}  // namespace

CertifiedExpander random_regular_certified(int n, int d, double epsilon_target,
                                           uint64_t seed) {
  require(n >= 2, ErrorKind::parameter, "random_regular_certified: need n >= 2");
  require(d >= 1 && d <= n - 1, ErrorKind::parameter,
          "random_regular_certified: degree out of range");
  require(std::isfinite(epsilon_target) && epsilon_target > 0.0, ErrorKind::parameter,
          "random_regular_certified: accuracy target must be positive");
  double thresh = epsilon_target * d / kTwoLn2;

  if (d == n - 1) {
    // complete graph: nontrivial adjacency eigenvalues are all -1
    require(1.0 <= thresh, ErrorKind::improbable,
            "random_regular_certified: target unattainable even by the complete graph");
    return {complete_graph(n), {static_cast<double>(d), 1.0, "random-certified"}};
  }
  require(d % 2 == 0 || n % 2 == 0, ErrorKind::parameter,
          "random_regular_certified: odd degree requires an even vertex count");

  Rng base(seed);
  for (int attempt = 0; attempt < kMaxSampleAttempts; attempt++) {
    Rng r = base.split(attempt);
    std::vector<GraphEdge> edges;
    std::vector<int> perm(n);
    for (int rep = 0; rep < d / 2; rep++) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n - 1; i > 0; i--)
        std::swap(perm[i], perm[r.next_below(static_cast<uint64_t>(i) + 1)]);
      for (int i = 0; i < n; i++) {
        if (perm[i] == i)
          edges.push_back({i, i, 2.0});  // fixed point: loop counts twice
        else
          edges.push_back({std::min(i, perm[i]), std::max(i, perm[i]), 1.0});
      }
    }
    if (d % 2 == 1) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = n - 1; i > 0; i--)
        std::swap(perm[i], perm[r.next_below(static_cast<uint64_t>(i) + 1)]);
      for (int i = 0; i + 1 < n; i += 2)
        edges.push_back({std::min(perm[i], perm[i + 1]), std::max(perm[i], perm[i + 1]), 1.0});
    }
    WeightedGraph g = canonical_graph(n, std::move(edges));
    double lam = (n <= kDenseCertifyCap) ? nontrivial_adjacency_bound(g, false)
                                         : power_lambda_estimate(g, d, r);
    if (lam <= thresh)
      return {std::move(g), {static_cast<double>(d), lam, "random-certified"}};
  }
  fail(ErrorKind::improbable,
       "random_regular_certified: no sample met the accuracy target in 50 attempts");
}

// ---- scaled approximations of complete graphs

namespace {

// degree for the random path: a near-Ramanujan sample has lambda close to
// 2 sqrt(d-1), so this leaves margin against eps * d / (2 ln 2)
int random_path_degree(double eps) {
  double want = 5.1 / (eps * eps);
  int d = 2 * static_cast<int>(std::ceil(want));
  return std::max(d, 4);
}

long long lps_order_half(long long z) { return z * (z * z - 1) / 2; }

// smallest prime q = 1 mod 4 with q(q^2-1)/2 in [n, 8n], q != p and
// q > 2 sqrt(p) so the Ramanujan certificate applies; 0 when none
long long pick_lps_q(long long p, long long n) {
  for (long long z = 5;; z += 4) {
    if (!is_prime_ll(z)) continue;
    long long half = lps_order_half(z);
    if (half > 8 * n) return 0;
    if (half >= n && z != p && static_cast<double>(z) > 2.0 * std::sqrt(static_cast<double>(p)))
      return z;
  }
}

double achieved_from_lambda(double lam, double d) {
  require(lam < d, ErrorKind::numerical, "expander certificate too weak to scale");
  if (lam / d <= 0.5) return kTwoLn2 * lam / d;
  return -std::log1p(-lam / d);  // honest bound when the 1/2 hypothesis fails
}

struct ApproxKey {
  int n;
  uint64_t eps_bits, seed;
  bool operator<(const ApproxKey& o) const {
    return std::tie(n, eps_bits, seed) < std::tie(o.n, o.eps_bits, o.seed);
  }
};

uint64_t double_bits(double x) {
  uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

}  // namespace

ScaledExpander expander_approx_complete(int n, double epsilon, uint64_t seed) {
  require(n >= 1, ErrorKind::parameter, "expander_approx: need n >= 1");
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter,
          "expander_approx: accuracy must be positive");
  if (static_cast<long long>(n) * (n - 1) / 2 <= kExactCliqueEdges)
    return {n, complete_graph(n), 0.0, true};

  static std::map<ApproxKey, ScaledExpander> cache;
  ApproxKey key{n, double_bits(epsilon), seed};
  auto hit = cache.find(key);
  if (hit != cache.end()) return hit->second;

  ScaledExpander out;
  long long phi = static_cast<long long>(std::floor(1.0 / (epsilon * epsilon)));
  long long plo = static_cast<long long>(std::ceil(0.5 / (epsilon * epsilon)));
  long long p = find_prime_1mod4(std::max(plo, 13LL), phi);
  long long q = p ? pick_lps_q(p, n) : 0;
  if (q) {
    LpsGraph lps = lps_ramanujan(p, q);
    WeightedGraph g;
    double d, lam;
    if (lps.bipartite) {
      std::vector<int> idpi(lps.g.n / 2);
      std::iota(idpi.begin(), idpi.end(), 0);
      g = collapse(lps.g, idpi);
      d = 2.0 * lps.cert.degree;
      lam = 2.0 * lps.cert.lambda_bound;
    } else {
      g = lps.g;
      d = lps.cert.degree;
      lam = lps.cert.lambda_bound;
    }
    int nprime = g.n;
    out = {nprime, scale_graph(g, nprime / d), achieved_from_lambda(lam, d), false};
    if (nprime <= kDenseCertifyCap) {
      double meas = measured_complete_eps(out.g, nprime);
      require(meas <= out.achieved_eps + 1e-9, ErrorKind::numerical,
              "expander_approx: certificate violated by the dense spectrum");
    }
  } else {
    int d = random_path_degree(epsilon);
    if (d >= n - 1) return {n, complete_graph(n), 0.0, true};
    CertifiedExpander ce = random_regular_certified(n, d, epsilon, seed);
    out = {n, scale_graph(ce.g, static_cast<double>(n) / d),
           achieved_from_lambda(ce.cert.lambda_bound, d), false};
  }
  cache[key] = out;
  return out;
}

ScaledExpander expander_approx_bipartite(int n, double epsilon, uint64_t seed) {
  require(n >= 1, ErrorKind::parameter, "expander_approx: need n >= 1");
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter,
          "expander_approx: accuracy must be positive");
  if (static_cast<long long>(n) * n <= kExactCliqueEdges)
    return {n, complete_bipartite_graph(n), 0.0, true};

  static std::map<ApproxKey, ScaledExpander> cache;
  ApproxKey key{n, double_bits(epsilon), seed};
  auto hit = cache.find(key);
  if (hit != cache.end()) return hit->second;

  ScaledExpander out;
  long long phi = static_cast<long long>(std::floor(1.0 / (epsilon * epsilon)));
  long long plo = static_cast<long long>(std::ceil(0.5 / (epsilon * epsilon)));
  long long p = find_prime_1mod4(std::max(plo, 13LL), phi);
  long long q = p ? pick_lps_q(p, n) : 0;
  if (q) {
    LpsGraph lps = lps_ramanujan(p, q);
    WeightedGraph g = lps.bipartite ? lps.g : double_cover(lps.g);
    int nprime = g.n / 2;
    double d = lps.cert.degree, lam = lps.cert.lambda_bound;
    out = {nprime, scale_graph(g, nprime / d), achieved_from_lambda(lam, d), false};
    if (g.n <= kDenseCertifyCap) {
      double meas = measured_bipartite_eps(out.g, nprime);
      require(meas <= out.achieved_eps + 1e-9, ErrorKind::numerical,
              "expander_approx: certificate violated by the dense spectrum");
    }
  } else {
    int d = random_path_degree(epsilon);
    if (d >= n - 1) return {n, complete_bipartite_graph(n), 0.0, true};
    CertifiedExpander ce = random_regular_certified(n, d, epsilon, seed);
    out = {n, scale_graph(double_cover(ce.g), static_cast<double>(n) / d),
           achieved_from_lambda(ce.cert.lambda_bound, d), false};
  }
  cache[key] = out;
  return out;
}

// ---- weighted expanders for product demand graphs

namespace {

// a vertex of demand d_i is split into floor(d_i / t) copies of demand t
// plus a remainder; this finds the largest t giving at least `target` full
// copies (the count is a left-continuous step function of t)
double split_threshold(const std::vector<double>& d, long long target) {
  double total = std::accumulate(d.begin(), d.end(), 0.0);
  auto count = [&](double t) {
    long long s = 0;
    for (double x : d) s += static_cast<long long>(std::floor(x / t));
    return s;
  };
  double hi = total / target;
  if (count(hi) >= target) return hi;
  double lo = hi;
  while (count(lo) < target) lo *= 0.5;
  for (int it = 0; it < 200; it++) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count(mid) >= target) lo = mid;
    else hi = mid;
  }
  return lo;
}

struct Splitting {
  double t = 0.0;
  std::vector<int> h_owner;                  // owner of each full copy kept in H
  std::vector<std::pair<int, double>> light; // (owner, demand) for L
};

Splitting split_demands(const std::vector<double>& d, long long nhat) {
  Splitting s;
  s.t = split_threshold(d, nhat);
  int n = static_cast<int>(d.size());
  s.h_owner.reserve(nhat);
  long long kept = 0;
  for (int i = 0; i < n; i++) {
    long long fi = static_cast<long long>(std::floor(d[i] / s.t));
    for (long long c = 0; c < fi; c++) {
      if (kept < nhat) {
        s.h_owner.push_back(i);
        kept++;
      } else {
        s.light.push_back({i, s.t});  // overshoot copies join the light side
      }
    }
    double rem = d[i] - s.t * static_cast<double>(fi);
    if (rem > 1e-8 * s.t) s.light.push_back({i, rem});
  }
  require(kept == nhat, ErrorKind::numerical, "weighted_expander: split underfilled");
  require(static_cast<long long>(s.light.size()) <= n, ErrorKind::numerical,
          "weighted_expander: splitting produced more than n light vertices");
  return s;
}

long long round_robin_count(long long nhat, long long k, long long l) {
  return (nhat - l - 1) / k + 1;  // |{j < nhat : j mod k == l}|
}

}  // namespace

WeightedGraph weighted_expander(const std::vector<double>& d, double epsilon,
                                uint64_t seed) {
  int n = static_cast<int>(d.size());
  require(n >= 1, ErrorKind::parameter, "weighted_expander: empty demand vector");
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter,
          "weighted_expander: accuracy must be positive");
  for (double x : d)
    require(std::isfinite(x) && x > 0.0, ErrorKind::parameter,
            "weighted_expander: demands must be positive");
  if (static_cast<long long>(n) * (n - 1) / 2 <= kExactCliqueEdges)
    return product_demand_graph(d);

  // bucketed so nearby sizes share one certified expander (memoized provider)
  long long want = std::max<long long>(
      static_cast<long long>(std::floor(2.0 * n / (epsilon * epsilon))) + 1, 2LL * n);
  // at tight accuracy the 2n/eps^2 blowup can dwarf the exact product graph;
  // when the exact answer is no larger than the expander's vertex count it is
  // smaller and more accurate than anything the split construction could emit
  if (static_cast<long long>(n) * (n - 1) / 2 <= want) return product_demand_graph(d);
  long long nhat0 = (want + 255) / 256 * 256;
  ScaledExpander prov =
      expander_approx_complete(static_cast<int>(nhat0), epsilon, seed);
  long long nhat = prov.n_prime;

  Splitting sp = split_demands(d, nhat);
  long long k = static_cast<long long>(sp.light.size());
  double t = sp.t;

  std::vector<GraphEdge> edges;
  edges.reserve(prov.g.edges.size() + static_cast<size_t>(nhat));
  for (const auto& e : prov.g.edges) {
    int ou = sp.h_owner[e.u], ov = sp.h_owner[e.v];
    if (ou != ov) edges.push_back({ou, ov, e.w * t * t});
  }
  for (long long l = 0; l < k; l++) {
    long long cnt = round_robin_count(nhat, k, l);
    double w = static_cast<double>(nhat) / cnt * sp.light[l].second * t;
    int ol = sp.light[l].first;
    for (long long j = l; j < nhat; j += k) {
      int oh = sp.h_owner[j];
      if (oh != ol) edges.push_back({ol, oh, w});
    }
  }
  return canonical_graph(n, std::move(edges));
}

WeightedGraph weighted_bipartite_expander(const std::vector<double>& da,
                                          const std::vector<double>& db,
                                          double epsilon, uint64_t seed) {
  int na = static_cast<int>(da.size()), nb = static_cast<int>(db.size());
  require(na >= 1 && nb >= 1, ErrorKind::parameter,
          "weighted_bipartite_expander: empty demand vector");
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::parameter,
          "weighted_bipartite_expander: accuracy must be positive");
  for (double x : da)
    require(std::isfinite(x) && x > 0.0, ErrorKind::parameter,
            "weighted_bipartite_expander: demands must be positive");
  for (double x : db)
    require(std::isfinite(x) && x > 0.0, ErrorKind::parameter,
            "weighted_bipartite_expander: demands must be positive");
  if (static_cast<long long>(na) * nb <= kExactCliqueEdges)
    return bipartite_product_demand_graph(da, db);

  int npr = std::max(na, nb);
  long long want = std::max<long long>(
      static_cast<long long>(std::floor(2.0 * npr / (epsilon * epsilon))) + 1, 2LL * npr);
  if (static_cast<long long>(na) * nb <= want)
    return bipartite_product_demand_graph(da, db);
  long long nhat0 = (want + 255) / 256 * 256;
  ScaledExpander prov =
      expander_approx_bipartite(static_cast<int>(nhat0), epsilon, seed);
  long long nhat = prov.n_prime;

  Splitting sa = split_demands(da, nhat);
  Splitting sb = split_demands(db, nhat);
  long long ka = static_cast<long long>(sa.light.size());
  long long kb = static_cast<long long>(sb.light.size());

  std::vector<GraphEdge> edges;
  edges.reserve(prov.g.edges.size() + static_cast<size_t>(2 * nhat));
  for (const auto& e : prov.g.edges) {
    int ou = sa.h_owner[e.u];
    int ov = sb.h_owner[e.v - nhat];
    edges.push_back({ou, na + ov, e.w * sa.t * sb.t});
  }
  // light vertices on one side route through star edges into a partition of
  // the opposite heavy side
  for (long long l = 0; l < ka; l++) {
    long long cnt = round_robin_count(nhat, ka, l);
    double w = static_cast<double>(nhat) / cnt * sa.light[l].second * sb.t;
    for (long long j = l; j < nhat; j += ka)
      edges.push_back({sa.light[l].first, na + sb.h_owner[j], w});
  }
  for (long long l = 0; l < kb; l++) {
    long long cnt = round_robin_count(nhat, kb, l);
    double w = static_cast<double>(nhat) / cnt * sb.light[l].second * sa.t;
    for (long long j = l; j < nhat; j += kb)
      edges.push_back({sa.h_owner[j], na + sb.light[l].first, w});
  }
  return canonical_graph(na + nb, std::move(edges));
}

}  // namespace bdd
