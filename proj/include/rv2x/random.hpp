#pragma once

#include <cstdint>
#include <random>

namespace rv2x {

using random_stream = std::mt19937_64;

enum class purpose : std::uint64_t {
  topology = 1,
  shadowing = 2,
  v2v_fading = 3,
  v2i_fading = 4,
  oracle = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, trial, link, purpose).
inline random_stream make_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t link, purpose p) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ trial);
  h = splitmix64(h ^ (link * 0x100000001b3ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(p));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return random_stream(seq);
}

}  // namespace rv2x
