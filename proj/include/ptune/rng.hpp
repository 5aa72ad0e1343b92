#pragma once

// Counter-based random number generation. Every draw is a pure function of
// (seed, stream, counter), so replicate runs are reproducible bit-for-bit
// no matter how work is scheduled across threads.

#include <cstdint>

namespace ptune::rng {

uint64_t mix64(uint64_t z);

class CounterRng {
 public:
  explicit CounterRng(uint64_t seed) : seed_(seed) {}

  uint64_t bits(uint64_t stream, uint64_t counter) const;

  // Uniform on the open interval (0, 1).
  double uniform(uint64_t stream, uint64_t counter) const;

  // Standard normal via the inverse CDF of a uniform draw.
  double normal(uint64_t stream, uint64_t counter) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
};

}  // namespace ptune::rng
