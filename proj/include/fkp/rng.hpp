#ifndef FKP_RNG_HPP_
#define FKP_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fkp {

// splitmix64 step; used both as a generator and to mix key material into seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// splitmix64 finalizer as a pure hash
inline std::uint64_t hash64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Derives an independent substream seed from a base seed and up to four key
// fields. Each field is hashed before absorption so that neighboring keys
// cannot collide.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0, std::uint64_t d = 0) {
  std::uint64_t s = hash64(seed + 0x9e3779b97f4a7c15ULL);
  s = hash64(s ^ hash64(a + 0xa0761c4c18bf091fULL));
  s = hash64(s ^ hash64(b + 0x94d049bb133111ebULL));
  s = hash64(s ^ hash64(c + 0xbf58476d1ce4e5b9ULL));
  s = hash64(s ^ hash64(d + 0x2545f4914f6cdd1dULL));
  return s;
}

// Small deterministic PRNG. Distributions are hand-rolled on top of splitmix64
// so streams do not depend on the standard library's implementation.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // standard normal via Box-Muller (one sample per call, no cache)
  double gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::uint64_t state_;
};

}  // namespace fkp

#endif  // FKP_RNG_HPP_
