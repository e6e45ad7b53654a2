#pragma once

// Deterministic random draws for test sweeps and the observability sampler.
// The generator is std::mt19937_64 seeded directly; doubles are built from
// the top 53 bits of each draw, so streams are identical across platforms
// for a given seed.

#include <cmath>
#include <cstdint>
#include <random>

namespace emlag {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double log_uniform(double a, double b) {
    return a * std::exp(uniform01() * std::log(b / a));
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace emlag
