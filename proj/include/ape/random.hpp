#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace ape {

/// Seedable random source. Sampling is implemented here rather than through
/// the <random> distributions so that sequences are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream keyed by several integers (seed, iteration, worker...).
  Rng(std::initializer_list<std::uint64_t> key);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Index drawn from an unnormalized nonnegative weight vector.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ape
