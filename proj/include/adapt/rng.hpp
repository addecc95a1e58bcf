#pragma once

#include <cstdint>
#include <random>

namespace adapt {

/// splitmix64 finalizer; used to derive independent stream seeds from a
/// master seed and stream indices.
inline uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0,
                            uint64_t c = 0) {
  return mix_seed(mix_seed(mix_seed(master ^ mix_seed(a)) ^ mix_seed(b)) ^
                  mix_seed(c));
}

}  // namespace adapt
