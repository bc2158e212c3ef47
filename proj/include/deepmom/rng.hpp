#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace deepmom {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent child seeds from a master
/// seed so that every run, repetition and grid cell owns its own stream.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix_seed(master);
  for (std::uint64_t p : path) s = mix_seed(s ^ mix_seed(p + 0x632be59bd9b4e019ULL));
  return s;
}

}  // namespace deepmom
