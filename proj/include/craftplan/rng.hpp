#pragma once

#include <cstdint>
#include <random>

namespace craftplan {

// splitmix64; used to derive independent seed streams from one run seed so
// that reordering consumers does not silently reshuffle every stream.
inline uint64_t split_mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  return split_mix64(base ^ split_mix64(stream + 0x51ed2701ULL));
}

// Bounded draw with a hand-pinned mapping (std::uniform_int_distribution is
// not specified bit-for-bit across standard libraries).
inline int bounded_int(std::mt19937_64& rng, int lo, int hi) {
  uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

// Uniform double in [0,1) from the top 53 bits.
inline double unit_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace craftplan
