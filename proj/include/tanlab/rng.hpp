#pragma once

#include <cstdint>
#include <initializer_list>

namespace tanlab {

// Pinned 64-bit generator: xoshiro256** (Blackman/Vigna), seeded through
// splitmix64. The generator and the stream-splitting rule below are part of
// the reproducibility contract: identical (master_seed, salts) give identical
// streams on every platform this library builds on.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream derivation: fold each salt into a splitmix64 chain. Trials, grid
// points and Monte-Carlo reps each get their own salt tuple, so streams are
// independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> salts) {
  std::uint64_t s = master;
  splitmix64_next(s);
  for (std::uint64_t salt : salts) {
    s ^= splitmix64_next(s) ^ (salt + 0x9e3779b97f4a7c15ULL);
    splitmix64_next(s);
  }
  return splitmix64_next(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [-halfwidth, halfwidth).
  double next_symmetric(double halfwidth) {
    return halfwidth * (2.0 * next_unit() - 1.0);
  }

  // Uniform on [0, hi).
  double next_positive(double hi) { return hi * next_unit(); }

  // Fair +/-1 coin.
  double next_sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection-free modulo bias is irrelevant at our n (<< 2^32), but keep
    // the multiply-shift reduction anyway.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

}  // namespace tanlab
