#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gridplan {

// Seeded RNG with implementation-independent draws. std::mt19937_64 is
// bit-exact across platforms, but std::uniform_int_distribution is not, so
// bounded draws use rejection sampling on the raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform draw in [0, n), n >= 1.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (polar form avoided to keep the
  // consumption of engine draws fixed per call).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gridplan
