#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace onebit {

/// Random engine used for every stream in the library.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a label; used to turn experiment names into stream ids.
constexpr std::uint64_t label_hash(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based stream derivation:
///   seed(base, stream, index) = splitmix64(splitmix64(base ^ splitmix64(stream)) + index)
///
/// A trial's stream depends only on (base, stream, index), never on which
/// worker runs it or in which order trials complete.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base ^ splitmix64(stream)) + index);
}

inline Rng make_rng(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return Rng{derive_seed(base, stream, index)};
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace onebit
