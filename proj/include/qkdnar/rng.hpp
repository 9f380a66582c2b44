#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qkdnar {

// Portable seeded randomness. std::mt19937_64 has a fully specified output
// sequence, but the standard distributions do not, so the helpers below
// derive doubles and bounded integers from raw 64-bit draws.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Named substreams. Each consumer of randomness gets its own stream so that
// adding draws in one place does not perturb another.
namespace stream {
inline constexpr std::string_view kLengths = "fiber-lengths";
inline constexpr std::string_view kDemandPairs = "demand-pairs";
inline constexpr std::string_view kDemandRates = "demand-rates";
inline constexpr std::string_view kAlpha = "alpha-draws";
inline constexpr std::string_view kTabu = "tabu-picks";
inline constexpr std::string_view kSweep = "sweep-seeds";
}  // namespace stream

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  Rng(std::uint64_t seed, std::string_view stream_name, std::uint64_t index = 0)
      : engine_(splitmix64(splitmix64(seed ^ fnv1a64(stream_name)) + index)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qkdnar
