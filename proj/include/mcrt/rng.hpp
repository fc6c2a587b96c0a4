#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace mcrt {

/// Splittable pseudo-random generator (xoshiro256++ seeded through
/// SplitMix64). Independent streams are derived from a master seed and a
/// stream id, so replicate k of an experiment draws from `Rng(seed, k)`
/// regardless of how replicates are scheduled across threads.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

  /// Child generator for sub-stream `id`; does not advance this generator.
  Rng split(std::uint64_t id) const;

private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace mcrt
