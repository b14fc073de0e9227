#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace certilab {

// splitmix64 finalizer (Steele/Lea/Flood); used both as a seed mixer and
// to derive per-cell seeds from (master, i, j, k) tuples.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(master ^ 0x1357924680aceb5fULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

// Deterministic random source: mt19937_64 (engine output is pinned by the
// C++ standard) with hand-rolled uniform and Box-Muller normal transforms,
// since the standard library distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Integer in {0, 1, ..., n-1} via rejection-free modulo of a wide draw.
  std::uint64_t below(std::uint64_t n) {
    // 64-bit draw modulo n; bias is < n / 2^64, irrelevant for n here.
    return engine_() % n;
  }

  // Standard normal via Box-Muller (one value per two uniforms; the
  // second value is cached).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace certilab
