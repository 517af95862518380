#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, counter), so replications can run in any order or in
// parallel and still produce identical bits.

#include <cstdint>
#include <limits>

namespace wasslearn {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a key triple into one 64-bit word. Distinct triples give
/// statistically independent outputs.
constexpr std::uint64_t mix3(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ (counter * 0xd1b54a32d192ed03ULL));
  return h;
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double to_unit_double(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// A counter-based stream: `(seed, stream)` names the stream, each call
/// advances the counter. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter = 0) noexcept
      : seed_(seed), stream_(stream), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    return mix3(seed_, stream_, counter_++);
  }

  constexpr double uniform() noexcept { return to_unit_double((*this)()); }

  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n). Multiply-shift; bias is below 2^-40 for n < 2^24.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    const auto r = static_cast<unsigned __int128>((*this)()) * n;
    return static_cast<std::uint64_t>(r >> 64);
  }

  constexpr bool bit() noexcept { return ((*this)() >> 63) != 0; }

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t stream() const noexcept { return stream_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

/// Derives a child stream id so nested indices (replication, grid point,
/// rollout) never collide.
constexpr std::uint64_t substream(std::uint64_t parent,
                                  std::uint64_t index) noexcept {
  return splitmix64(parent * 0x9e3779b97f4a7c15ULL + index + 1);
}

}  // namespace wasslearn
