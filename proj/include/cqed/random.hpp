#pragma once

#include <cstdint>
#include <random>

namespace cqed {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for item `index` of a run seeded with `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t stream = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0) {
  return Rng(derive_seed(master, index, stream));
}

} // namespace cqed
