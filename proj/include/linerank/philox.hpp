#pragma once

// Counter-based random numbers.
//
// Draws are a pure function of (stream key, row, column): the block cipher Philox4x32-10
// (Salmon et al., Random123) is applied to the counter {row_lo, row_hi, column, 0} under a
// 64-bit key. The key is derived from (seed, purpose tag, replication) with SplitMix64 and
// FNV-1a, so every replication and every purpose gets an independent stream and any prefix
// of rows can be regenerated without replaying the rest.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace linerank::rng {

using Block = std::array<std::uint32_t, 4>;

inline Block philox4x32_10(Block ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Identifies one independent random stream.
struct StreamKey {
  std::uint64_t seed = 0;
  std::string_view purpose;
  std::uint64_t replication = 0;

  constexpr std::uint64_t value() const {
    return splitmix64(splitmix64(splitmix64(seed) ^ fnv1a64(purpose)) ^ replication);
  }
};

class CounterStream {
public:
  constexpr explicit CounterStream(const StreamKey& key) : key_(key.value()) {}

  Block block(std::uint64_t row, std::uint32_t column) const {
    return philox4x32_10({static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32), column, 0u},
                         {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
  }

  /// Two uniforms in the open interval (0, 1) with 53 random bits each.
  std::array<double, 2> uniforms(std::uint64_t row, std::uint32_t column) const {
    const Block w = block(row, column);
    return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
  }

  /// Standard normal (Box-Muller, cosine branch).
  double normal(std::uint64_t row, std::uint32_t column) const {
    const auto [u1, u2] = uniforms(row, column);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Difference of two independent unit-mean exponentials (standard Laplace, scale 1).
  double laplace(std::uint64_t row, std::uint32_t column) const {
    const auto [u1, u2] = uniforms(row, column);
    return std::log(u2) - std::log(u1);
  }

  std::uint64_t key() const { return key_; }

private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t key_;
};

}  // namespace linerank::rng
