#pragma once

#include <cmath>
#include <cstdint>

namespace quadnav {

// Deterministic, platform-independent PRNG (splitmix64 core). Used everywhere
// instead of <random> distributions so runs are bit-reproducible.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless hash of a key tuple, for lattice noise and seed derivation.
inline uint64_t hash_mix(uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = a * 0x9e3779b97f4a7c15ULL + b * 0xc2b2ae3d27d4eb4fULL +
               c * 0x165667b19e3779f9ULL + 0x27d4eb2f165667c5ULL;
  splitmix64(s);
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {
    // decorrelate nearby seeds
    splitmix64(state_);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n)
  uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

  // standard normal via Box-Muller (deterministic, no cached spare)
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  uint64_t state_;
};

}  // namespace quadnav
