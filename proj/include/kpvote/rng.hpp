#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kpvote {

// Seed derivation for reproducible experiments. Every consumer of randomness
// draws from its own stream keyed by (master seed, index, purpose tag), so
// results are independent of scheduling and thread count.

/// splitmix64 step; also usable as a 64-bit finalizer/hash.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// FNV-1a over a short string tag.
inline std::uint64_t tag_hash(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Mix two 64-bit values into a new seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  return splitmix64(s);
}

/// Derived stream seed = hash(master, index, purpose).
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index,
                                 std::string_view purpose) {
  return mix_seed(mix_seed(master, index), tag_hash(purpose));
}

/// Ready-to-use generator for one purpose-tagged stream.
inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t index,
                                   std::string_view purpose) {
  return std::mt19937_64(stream_seed(master, index, purpose));
}

}  // namespace kpvote
