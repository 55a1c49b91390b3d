#pragma once

#include <cstdint>

namespace savvy {

// SplitMix64 step: advances state by the golden-ratio increment and returns
// the finalized value.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) { return splitmix64(x); }

// Counter-based random stream. The starting state is a pure function of
// (seed, counter, lane):
//
//   state = mix64(mix64(mix64(seed) ^ counter) ^ lane)
//
// and every draw is one SplitMix64 step from there. Replicate r of a
// bootstrap uses counter r, so results do not depend on scheduling.
class CounterStream {
 public:
  constexpr CounterStream(std::uint64_t seed, std::uint64_t counter, std::uint64_t lane = 0)
      : state_(mix64(mix64(mix64(seed) ^ counter) ^ lane)) {}

  constexpr std::uint64_t next() { return splitmix64(state_); }

  // Uniform integer in [0, n): high 64 bits of next() * n.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Uniform double in the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace savvy
