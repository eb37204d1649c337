#include "qdent/random.hpp"

#include <cmath>

#include "qdent/units.hpp"

namespace qdent {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : Rng(seed, 0, 0) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
  // Fold the three keys through SplitMix64 so that neighbouring keys give
  // unrelated states.
  std::uint64_t key = seed;
  std::uint64_t h = splitmix64(key);
  key = h ^ stream;
  h = splitmix64(key);
  key = h ^ block;
  for (auto& word : s_) word = splitmix64(key);
}

Rng::result_type Rng::operator()() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double mean) {
  return -mean * std::log(uniform());
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * units::kPi * u2);
}

}  // namespace qdent
