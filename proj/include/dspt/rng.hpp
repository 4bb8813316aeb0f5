#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dspt::rng {

// SplitMix64; used to expand seeds into generator state.
struct SplitMix64 {
  std::uint64_t state;

  constexpr explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

// xoshiro256**, state filled from SplitMix64. Cross-platform reproducible:
// all draws are pure 64-bit integer arithmetic.
class Xoshiro256ss {
public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log argument.
  double uniform_pos() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be >= 1.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  // Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

// Derives an independent stream seed for (seed, index). Counter-based: any
// per-sample kernel may construct its own generator from the pair, so the
// result is the same regardless of evaluation order or thread count.
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 sm(seed ^ (0x9e3779b97f4a7c15ull * (index + 0x632be59bd9b4e019ull)));
  return sm.next();
}

// Named sub-stream roles so one user seed never feeds two purposes.
enum class Stream : std::uint64_t {
  Means = 1,
  Anchors = 2,
  TrainData = 3,
  TestData = 4,
  Noise = 5,
  Batch = 6,
  Verify = 7,
  Sweep = 8,
};

constexpr std::uint64_t substream(std::uint64_t seed, Stream role,
                                  std::uint64_t index = 0) {
  return substream(substream(seed, static_cast<std::uint64_t>(role)), index);
}

}  // namespace dspt::rng
