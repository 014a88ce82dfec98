#pragma once

#include <cstdint>

namespace liouville {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based seed splitting: child = mix(mix(seed ^ stream) + index).
/// Every random draw in the library derives its seed through this function,
/// so a sample is reproducible from (seed, stream, index) alone.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(seed ^ mix64(stream)) + index);
}

namespace streams {
inline constexpr std::uint64_t metric = 1;
inline constexpr std::uint64_t initial = 2;
inline constexpr std::uint64_t onofri = 3;
inline constexpr std::uint64_t local_mt = 4;
inline constexpr std::uint64_t global_mt = 5;
inline constexpr std::uint64_t poincare = 6;
inline constexpr std::uint64_t brezis_merle = 7;
inline constexpr std::uint64_t green_poles = 8;
}  // namespace streams

}  // namespace liouville
