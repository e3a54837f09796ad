/// Deterministic random streams with a fixed u64 -> double mapping.
///
/// std::mt19937_64 supplies raw bits; the double mappings are spelled out
/// here so that draws are bit-identical across standard libraries. All
/// uniform doubles fall strictly inside the open interval.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace srcloc {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), eng_(seed) {}
  virtual ~Rng() = default;

  uint64_t seed() const { return seed_; }

  virtual uint64_t next_u64() { return eng_(); }

  /// Uniform double strictly inside (0, 1): centers of 2^52 equal bins.
  /// (With 53 bits the top bin would round up to exactly 1.0; every step of
  /// the 52-bit form is exact, so the ends are never attained.)
  double uniform() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Uniform double strictly inside (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
  uint64_t below(uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller (two uniform draws per call).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Independent child stream; deterministic in (seed, stream).
  Rng derive(uint64_t stream) const {
    return Rng(splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

 private:
  uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace srcloc
