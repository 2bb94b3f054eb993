// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>

#include "ust3d/geometry.hpp"

namespace ust3d {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// Identifies one independent random stream. Identical (seed, stream) pairs
/// reproduce identical draws bit-for-bit.
struct RngConfig {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// A sub-stream family: child(k) for distinct k are independent streams,
  /// and distinct from every stream of any other parent.
  RngConfig child(std::uint64_t k) const {
    std::uint64_t s = seed ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t h = detail::splitmix64(s);
    s = h ^ stream;
    h = detail::splitmix64(s);
    return {h, k};
  }

  friend bool operator==(const RngConfig&, const RngConfig&) = default;
};

/// xoshiro256** seeded from (seed, stream) through SplitMix64.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(RngConfig cfg) {
    std::uint64_t sm = cfg.seed;
    const std::uint64_t a = detail::splitmix64(sm);
    sm = a ^ (cfg.stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform integer in [0, n) by rejection (exactly uniform).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do r = (*this)();
    while (r >= limit);
    return r % n;
  }

  /// One of the six lattice directions, uniformly.
  int direction() { return static_cast<int>(below(6)); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_[4];
};

/// Injective stream id for points with every coordinate in [-2^20, 2^20).
inline std::uint64_t point_stream(const Point& p) {
  constexpr std::int64_t kHalf = std::int64_t{1} << 20;
  auto enc = [](std::int64_t c) {
    if (c < -kHalf || c >= kHalf) throw RuntimeFailure("point_stream: coordinate out of range");
    return static_cast<std::uint64_t>(c + kHalf);
  };
  return (enc(p.x) << 42) | (enc(p.y) << 21) | enc(p.z);
}

}  // namespace ust3d
