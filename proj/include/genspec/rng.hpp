#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace genspec {

// Portable pseudo-random source.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. All derived draws (uniform reals, bounded integers, shuffles) are
// computed here from raw 64-bit outputs with integer arithmetic and one exact
// scaling, so the same seed produces the same stream on every conforming
// platform. std::*_distribution is deliberately not used: its algorithms are
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on {0, ..., n - 1}; n must be positive. Rejection sampling keeps
  // the result exactly uniform.
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer over (base, stream); used to derive independent,
// reproducible seeds for sub-streams (repeats, simulation blocks, splits).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace genspec
