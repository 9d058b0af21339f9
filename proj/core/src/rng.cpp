#include "enflow/rng.hpp"

#include "enflow/errors.hpp"

namespace enflow {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& word : s_) word = splitmix64(seed);
}

std::uint64_t Rng::next() {
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

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

std::int64_t Rng::binomial(std::int64_t trials, double p) {
  if (trials < 0) throw PreconditionError("binomial: negative trial count");
  if (p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::int64_t hits = 0;
  for (std::int64_t k = 0; k < trials; ++k) hits += uniform() < p ? 1 : 0;
  return hits;
}

std::vector<std::int64_t> Rng::multinomial(std::int64_t count,
                                           std::span<const double> probs) {
  std::vector<std::int64_t> out(probs.size(), 0);
  if (probs.empty()) {
    if (count != 0) throw PreconditionError("multinomial: no categories for positive count");
    return out;
  }
  // Suffix sums keep the conditional probabilities well defined without
  // accumulating subtraction error.
  std::vector<double> tail(probs.size() + 1, 0.0);
  for (std::size_t j = probs.size(); j-- > 0;) {
    if (probs[j] < 0.0) throw PreconditionError("multinomial: negative probability");
    tail[j] = tail[j + 1] + probs[j];
  }
  if (count > 0 && !(tail[0] > 0.0)) {
    throw PreconditionError("multinomial: probabilities have no mass");
  }
  std::int64_t remaining = count;
  for (std::size_t j = 0; j < probs.size() && remaining > 0; ++j) {
    if (tail[j + 1] <= 0.0) {
      out[j] = remaining;
      remaining = 0;
      break;
    }
    const std::int64_t drawn = binomial(remaining, probs[j] / tail[j]);
    out[j] = drawn;
    remaining -= drawn;
  }
  return out;
}

}  // namespace enflow
