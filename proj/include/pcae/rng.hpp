#pragma once

#include <cstdint>
#include <random>

namespace pcae {

// splitmix64 step; used to derive independent seed streams from one master
// seed so that per-row / per-epoch randomness does not depend on scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic {seed, stream, index} -> 64-bit value. Distinct streams keep
// e.g. weight-init draws independent of masking-noise draws.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index = 0) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  std::uint64_t b = splitmix64(s);
  s ^= index * 0x9e3779b97f4a7c15ULL + 0x94d049bb133111ebULL;
  std::uint64_t c = splitmix64(s);
  return a ^ (b + 0x165667b19e3779f9ULL) ^ (c << 1);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t index = 0) {
  return std::mt19937_64(mix_seed(seed, stream, index));
}

// Stream tags (arbitrary distinct constants).
namespace seed_stream {
constexpr std::uint64_t decoder_init = 0x01;
constexpr std::uint64_t binarize = 0x02;
constexpr std::uint64_t masking = 0x03;
constexpr std::uint64_t shuffle = 0x04;
}  // namespace seed_stream

}  // namespace pcae
