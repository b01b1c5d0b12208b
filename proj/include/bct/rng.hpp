#pragma once

#include <cstdint>

namespace bct {

/// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives a child seed from (seed, index), e.g. master seed -> per-run seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed ^ 0x5851f42d4c957f2dull) + index);
}

/// Counter-based random stream addressed by (seed, stream_id).
///
/// Draws are a pure function of (seed, stream_id, draw index), so any
/// stream can be replayed in isolation and results do not depend on how
/// work is scheduled across threads. Trial k of a run uses stream k.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream_id)
      : key_(mix64(mix64(seed + 0x9e3779b97f4a7c15ull) ^
                   (stream_id * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull))) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (ctr_++) * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n >= 1. Lemire's multiply-shift rejection.
  std::uint64_t next_below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // UniformRandomBitGenerator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace bct
