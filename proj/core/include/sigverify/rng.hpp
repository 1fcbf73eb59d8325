#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sigverify {

// All randomness in the library flows through these helpers so that results
// are identical across platforms and standard library versions. The std::
// distributions are implementation-defined and must not be used.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive the seed of a named sub-stream from a master seed. Independent
/// components (patch sampling, fold splits, ...) each get their own stream.
inline std::uint64_t named_seed(std::uint64_t master, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stream name
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t state = master ^ h;
  return splitmix64(state);
}

/// Fold an extra salt (user index, grid cell, ...) into a stream seed.
inline std::uint64_t salted_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ULL + salt);
  return splitmix64(state);
}

/// 53-bit uniform in [0,1).
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

/// Uniform integer in [0, n). Modulo bias is below n / 2^64, irrelevant for
/// the index ranges used here.
inline std::uint64_t uniform_index(std::mt19937_64& g, std::uint64_t n) {
  return g() % n;
}

/// Standard normal via Box-Muller; consumes exactly two draws.
inline double normal(std::mt19937_64& g) {
  double u1 = (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  double u2 = static_cast<double>(g() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Fisher-Yates shuffle driven by the portable draws above.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace sigverify
