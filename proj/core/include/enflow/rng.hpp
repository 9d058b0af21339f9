#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace enflow {

/// xoshiro256** (Blackman & Vigna) seeded through splitmix64. The algorithm
/// is fixed so that simulations are bit-reproducible across platforms; no
/// std:: distributions are used because their output is implementation
/// defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  bool bernoulli(double p);
  /// Counts successes of `trials` Bernoulli(p) draws.
  std::int64_t binomial(std::int64_t trials, double p);
  /// Splits `count` over categories with probabilities `probs` (summing to
  /// ~1) by sequential conditional binomials.
  std::vector<std::int64_t> multinomial(std::int64_t count,
                                        std::span<const double> probs);

 private:
  std::uint64_t s_[4];
};

}  // namespace enflow
