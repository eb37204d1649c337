#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qdent {

// xoshiro256++ with SplitMix64 seeding. Each (seed, stream, block) triple
// maps to an independent generator, so blocks can be simulated in any
// order or on any thread and still reproduce the same stream.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t block);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on the open interval (0, 1).
  double uniform();
  // Exponential with the given mean; mean == 0 returns 0.
  double exponential(double mean);
  // Standard normal via Box-Muller (no cached second value, so the number
  // of draws per call is fixed).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

// Stream tags keep the substreams of different pipeline stages disjoint.
namespace streams {
inline constexpr std::uint64_t kEmission = 0x454d4953ULL;
inline constexpr std::uint64_t kDetection = 0x44455445ULL;
inline constexpr std::uint64_t kDarkCounts = 0x4441524bULL;
inline constexpr std::uint64_t kHom = 0x484f4d30ULL;
}  // namespace streams

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace qdent
