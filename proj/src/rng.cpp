#include "ptune/rng.hpp"

#include "ptune/dist.hpp"

namespace ptune::rng {

uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t CounterRng::bits(uint64_t stream, uint64_t counter) const {
  uint64_t h = mix64(seed_ ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ mix64(stream));
  h = mix64(h ^ mix64(counter));
  return h;
}

double CounterRng::uniform(uint64_t stream, uint64_t counter) const {
  // 53 mantissa bits, offset by half an ulp so 0 and 1 are never returned.
  const uint64_t b = bits(stream, counter) >> 11;
  return (static_cast<double>(b) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(uint64_t stream, uint64_t counter) const {
  return dist::normal_quantile(uniform(stream, counter));
}

}  // namespace ptune::rng
