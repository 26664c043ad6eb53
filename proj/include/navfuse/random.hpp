#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace navfuse {

// FNV-1a, used to derive independent deterministic engines per named stream
// from one scenario seed.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (const char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream) {
  const std::uint64_t h = fnv1a64(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace navfuse
