#pragma once

#include <cstdint>

namespace etcsim {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for an independent random stream derived from a master seed.
///
/// Every consumer of randomness in a run gets its own stream index:
/// stream 0 drives the disturbance, stream 1 the channel delay, and sweeps
/// derive per-run master seeds with stream = 1000 + run index.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(master ^ mix64(stream + 1));
}

}  // namespace etcsim
