#pragma once

#include <cmath>
#include <cstdint>

namespace peacock {

// Simulation time and durations are integer microseconds everywhere.
using Micros = std::int64_t;

inline constexpr Micros kMicrosPerSecond = 1'000'000;
inline constexpr Micros kMicrosPerMilli = 1'000;

constexpr Micros seconds(std::int64_t s) { return s * kMicrosPerSecond; }
constexpr Micros millis(std::int64_t ms) { return ms * kMicrosPerMilli; }

inline Micros from_seconds(double s) {
  return static_cast<Micros>(std::llround(s * static_cast<double>(kMicrosPerSecond)));
}

constexpr double to_seconds(Micros us) {
  return static_cast<double>(us) / static_cast<double>(kMicrosPerSecond);
}

}  // namespace peacock
