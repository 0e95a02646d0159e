#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace convtopic {

/// Deterministic pseudo-random stream: xoshiro256** seeded through splitmix64.
///
/// The sequence depends only on the seed, so runs are reproducible across
/// compilers and platforms (std:: engines and distributions are not used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n). n must be > 0. Unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Derives an independent child stream; the parent advances by one draw.
  Rng split();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace convtopic
