#pragma once

#include <cstdint>
#include <random>

namespace skyrig {

using RngStream = std::mt19937_64;

enum class SensorKind : std::uint64_t { None = 0, Gps = 1, Barometer = 2, Magnetometer = 3 };

enum class StreamPurpose : std::uint64_t { SensorNoise = 1, FuzzSampling = 2, RunSeed = 3 };

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ splitmix64(v + 0x632be59bd9b4e019ULL));
}

/// Sub-seed for one (uav, sensor, purpose) triple. Counter-based: the value
/// for one triple never depends on how many other triples exist.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t uav_index,
                                           SensorKind sensor, StreamPurpose purpose) {
  std::uint64_t h = splitmix64(seed);
  h = hash_combine(h, uav_index);
  h = hash_combine(h, static_cast<std::uint64_t>(sensor));
  h = hash_combine(h, static_cast<std::uint64_t>(purpose));
  return h;
}

inline RngStream derive_rng_stream(std::uint64_t seed, std::uint64_t uav_index, SensorKind sensor,
                                   StreamPurpose purpose) {
  return RngStream(derive_seed(seed, uav_index, sensor, purpose));
}

}  // namespace skyrig
