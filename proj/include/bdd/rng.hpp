#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace bdd {

// Splittable counter-free PRNG built on the splitmix64 finalizer.
// Every randomized routine takes an explicit seed and derives independent
// streams with split(); identical seeds give identical results on every
// platform (no std::random distributions anywhere, their mappings are
// implementation defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // independent stream keyed by (current state, label); does not advance this
  Rng split(uint64_t label) const {
    return Rng(mix(state_ ^ mix(label + 0x632be59bd9b4e019ull)));
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform in {0, ..., bound-1}; bound >= 1 (rejection sampling, unbiased)
  uint64_t next_below(uint64_t bound) {
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  // standard normal via Box-Muller, explicit formula for cross-platform
  // determinism; one value per call, the pair's twin is cached
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    while (u <= 0.0) u = next_double();
    double v = next_double();
    double m = std::sqrt(-2.0 * std::log(u));
    spare_ = m * std::sin(6.283185307179586476925287 * v);
    have_spare_ = true;
    return m * std::cos(6.283185307179586476925287 * v);
  }

  // uniform k-subset of {0, ..., n-1} via partial Fisher-Yates; sorted output
  std::vector<int> subset(int n, int k) {
    if (k > n) k = n;
    std::vector<int> pool(n);
    for (int i = 0; i < n; i++) pool[i] = i;
    for (int i = 0; i < k; i++) {
      int j = i + static_cast<int>(next_below(static_cast<uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace bdd
