#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace morphotok::internal {

// Uniform integer in [0, bound) from raw 64-bit draws. Unlike
// std::uniform_int_distribution the sequence is the same on every
// standard library.
inline std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <typename T>
void Shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformBelow(rng, i)]);
  }
}

}  // namespace morphotok::internal
