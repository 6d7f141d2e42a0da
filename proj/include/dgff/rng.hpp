#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace dgff {

// Deterministic RNG streams for reproducible experiments.
//
// Every stream is derived from a 64-bit master seed plus a list of integer
// tags (module id, N, purpose, block index, ...) hashed through splitmix64.
// The same (seed, tags) always yields the same stream, independent of how
// many other streams exist or on how many threads they run. Generation uses
// xoshiro256++ and hand-rolled uniform/normal conversions so that output does
// not depend on the standard library's distribution implementations.
class RngStream {
 public:
  // Purpose tags used when deriving substreams. Keep values stable: they are
  // part of the reproducibility contract of serialized reports.
  enum Purpose : std::uint64_t {
    kGridSample = 1,
    kDgffDraw = 2,
    kVoronoiProbe = 3,
    kW1Reference = 4,
    kW1Calibration = 5,
    kGapTable = 6,
    kGeneric = 7,
  };

  explicit RngStream(std::uint64_t seed) { init(seed); }

  static RngStream derive(std::uint64_t master_seed,
                          std::initializer_list<std::uint64_t> tags) {
    std::uint64_t x = master_seed;
    for (std::uint64_t t : tags) x = mix(x ^ (t + 0x9e3779b97f4a7c15ULL));
    RngStream s(0);
    s.init(x);
    return s;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n) {
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v / (UINT64_MAX / n);
  }

  // Standard normal via Box-Muller, one cached value.
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  void init(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x = mix(x);
      w = x;
    }
    has_cache_ = false;
    cache_ = 0.0;
  }

  std::uint64_t s_[4];
  bool has_cache_;
  double cache_;
};

}  // namespace dgff
