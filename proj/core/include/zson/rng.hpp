#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace zson {

// splitmix64 finalizer; good avalanche, used to key independent streams off
// one master seed.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t stream_seed(uint64_t seed, uint64_t stream) {
  return mix64(mix64(seed) ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
}

// mt19937_64 plus hand-rolled distributions. The standard pins the engine's
// output sequence but not the distributions, and we need bit-identical runs
// across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // [0, 1) with 53-bit resolution
  double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // [0, n); modulo bias is ~n/2^64, irrelevant at our range sizes
  int uniform_int(int n) { return int(eng_() % uint64_t(n)); }

  // Box-Muller, one value per call. The sine partner is discarded so the
  // stream position never depends on call history.
  double normal() {
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  // Sample an index from explicit probabilities (assumed to sum to ~1).
  int categorical(const float* p, int n) {
    double u = uniform01();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += double(p[i]);
      if (u < acc) return i;
    }
    return n - 1;
  }

  // In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = int(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      std::swap(v[size_t(i)], v[size_t(j)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace zson
