#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace poses::world {

// Deterministic sampler facade. std::mt19937_64 output is pinned by the
// standard, but the standard *distributions* are not; the arithmetic below is
// fixed here so that identically seeded runs produce identical bytes on any
// conforming implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Knuth's product method; adequate for the small clutter rates used here.
  int poisson(double mean) {
    double limit = std::exp(-mean);
    double prod = 1.0;
    int count = -1;
    do {
      prod *= uniform();
      ++count;
    } while (prod > limit);
    return count;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace poses::world
