#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rlab {

/// One round of the splitmix64 generator; advances `state` and returns the output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// xoshiro256++ generator with deterministic stream splitting.
///
/// Streams for distinct (seed, stream) pairs are derived by mixing the
/// stream index into the seed material, so a Monte Carlo loop can hand
/// sample i its own generator and get the same draws regardless of how
/// the loop is scheduled across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t sm = seed;
    std::uint64_t a = splitmix64(sm);
    sm = a ^ (index * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull);
    return Rng(splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace rlab
