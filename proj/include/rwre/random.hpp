#pragma once

#include <cstdint>
#include <limits>

namespace rwre {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Keyed hash used for every seed derivation in the toolkit: replicate k of a
// run with master seed s gets derive_seed(s, k), never shared engine state.
constexpr std::uint64_t derive_seed(std::uint64_t key, std::uint64_t index) {
  return mix64(key ^ mix64(index ^ 0x6a09e667f3bcc909ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t key, std::uint64_t a,
                                    std::uint64_t b) {
  return derive_seed(derive_seed(key, a), b);
}

// Counter-based generator: output j is mix64(key + j * gamma). Satisfies
// UniformRandomBitGenerator, so the standard distributions accept it.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key = 0) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

using Rng = CounterRng;

// Uniform on [0, 1) with 53 random bits.
template <class G>
inline double uniform01(G& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace rwre
