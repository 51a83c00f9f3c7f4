#pragma once

#include <cmath>
#include <cstdint>

namespace stablab {

// Splittable counter-based generator (splitmix64). All randomness in the
// library flows through this type so identical seeds give bit-identical
// streams on every platform and thread count.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // standard normal via Box-Muller (pinned algorithm, no cached spare)
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // index in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // rejection-free modulo bias is negligible for our n but avoid it anyway
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
};

// Deterministic seed derivation for child streams (heads, grid cells, repeats).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  SplitMix64 g(base ^ (salt * 0x9e3779b97f4a7c15ULL + 0x165667b19e3779f9ULL));
  return g.next_u64();
}

}  // namespace stablab
