#pragma once

// Deterministic random streams. A small splitmix64 engine is used instead of
// <random> distributions because std::uniform_*_distribution output is
// implementation-defined, which would break the byte-identical-output
// contract of the scoring and simulation pipelines.

#include <cmath>
#include <cstdint>
#include <string_view>

#include "scrl/error.hpp"

namespace scrl {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Multiply-shift reduction; bias is negligible for the
  // group sizes used here.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller. One value per call, no cached spare, so
  // the stream position depends only on the number of calls made.
  double next_normal() {
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double next_normal(double mu, double sigma) { return mu + sigma * next_normal(); }

  // Marsaglia-Tsang gamma(alpha, 1).
  double next_gamma(double alpha) {
    if (!(alpha > 0.0)) throw ValidationError("gamma shape must be positive");
    if (alpha < 1.0) {
      const double u = next_double();
      return next_gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = next_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Per-key substreams: results are independent of the order in which keys are
// processed, which keeps parallel per-query evaluation schedule-independent.
inline Rng derive_rng(std::uint64_t seed, std::string_view key) {
  return Rng(seed ^ fnv1a64(key) ^ 0x5851f42d4c957f2dull);
}

inline Rng derive_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(seed ^ (index * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
}

}  // namespace scrl
