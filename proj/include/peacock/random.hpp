#pragma once

#include <cstdint>
#include <random>

namespace peacock {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream from the run seed. Streams depend only on
// (seed, stream id), never on the order entities are constructed in.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng{splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))};
}

namespace stream {
inline constexpr std::uint64_t kWorkload = 1;
inline constexpr std::uint64_t kJobAssignment = 2;
inline constexpr std::uint64_t kCentral = 3;
inline constexpr std::uint64_t kSchedulerBase = 1ULL << 20;
inline constexpr std::uint64_t kWorkerBase = 1ULL << 32;
}  // namespace stream

}  // namespace peacock
