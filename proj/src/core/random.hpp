#pragma once

#include <cstdint>
#include <random>

namespace coxkern {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used for every seed derivation in the library.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter scheme: child = mix64(mix64(master ^ mix64(stream)) + index).
// Streams name the consumer (path, arrivals, replication, ...); index counts
// replications. Any (master, stream, index) triple maps to a fixed seed, so
// replications can run in any order or in parallel.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(master ^ mix64(stream)) + index);
}

namespace seed_stream {
inline constexpr std::uint64_t replication = 0;
inline constexpr std::uint64_t rate_path = 1;
inline constexpr std::uint64_t arrivals = 2;
}  // namespace seed_stream

inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(mix64(seed)),
                    static_cast<std::uint32_t>(mix64(seed) >> 32)};
  return Rng(seq);
}

}  // namespace coxkern
