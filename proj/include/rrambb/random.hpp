#pragma once

#include <boost/random/normal_distribution.hpp>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rrambb {

/// SplitMix64 finalizer, used to turn (seed, stream, index) tuples into
/// well-separated engine seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix64(seed);
  for (auto p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

/// A seeded source of uniform and Gaussian variates. One stream must have
/// one user at a time; parallel work derives independent streams.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  static RandomStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return RandomStream(derive_seed(seed, path));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }
  int bit() { return static_cast<int>(engine_() >> 63); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  // Ziggurat sampler: the device model draws billions of variates.
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace rrambb
