#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace fleetsim {

// Deterministic random source. Variates are derived from raw mt19937_64 bits
// with fixed inversions (never std::*_distribution, whose output is
// implementation-defined) so identical seeds give identical streams on every
// platform and the golden files stay byte-stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform double in [0, 1)
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  // exponential with the given rate (mean 1/rate); rate > 0
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::uint64_t bits() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace fleetsim
