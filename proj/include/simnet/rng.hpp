#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random sampling. Every draw is a pure function of
// (key, counter...), so replicas, ticks, sensors, and edges can be sampled
// in any order -- including from parallel workers -- and still produce the
// same stream.

namespace simnet {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
}

// Sub-seed for an indexed stream (replica, slope row, instance, ...).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
  return hash_combine(hash_combine(mix64(root + 0x9E3779B97F4A7C15ull), a), b);
}

// Uniform in (0, 1]; never 0, so log() is safe.
constexpr double bits_to_unit(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double counter_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
  return bits_to_unit(hash_combine(hash_combine(key, a), b));
}

// Standard normal draw addressed by (key, a, b), via Box-Muller.
inline double counter_gaussian(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
  constexpr double kTwoPi = 6.283185307179586476925287;
  const std::uint64_t h1 = hash_combine(hash_combine(key, a), b);
  const std::uint64_t h2 = mix64(h1 + 0x9E3779B97F4A7C15ull);
  const double u1 = bits_to_unit(h1);
  const double u2 = bits_to_unit(h2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace simnet
