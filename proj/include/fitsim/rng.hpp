#pragma once

// Counter-based random words: word(seed, stream, counter) is a pure function,
// so any position in any stream can be regenerated without replaying state.
// A run owns several streams (step variates, collision resampling, initial
// population); snapshots persist only the integer cursors.
//
// The generator is the SplitMix64 output function applied to
// key + (counter+1) * GOLDEN, i.e. a SplitMix64 sequence whose seed is a
// per-(seed,stream) key. Streams are decorrelated by hashing the stream id
// into the key.

#include <cmath>
#include <cstdint>

namespace fitsim {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix64(seed ^ detail::mix64(stream ^ 0xa0761d6478bd642fULL))) {}

  /// Word at an absolute counter position. Stateless; O(1).
  [[nodiscard]] std::uint64_t word_at(std::uint64_t counter) const {
    return detail::mix64(key_ + (counter + 1) * detail::kGolden);
  }

 private:
  std::uint64_t key_;
};

/// Maps a word to [0,1) with 53 random bits; never returns 1.0.
[[nodiscard]] inline double unit_from_word(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

/// Threshold t such that (word < t) has probability p up to 2^-63.
[[nodiscard]] inline std::uint64_t bernoulli_threshold(double p) {
  // long double keeps 64 mantissa bits on x86-64; for p in (0,1) the scaled
  // value stays below 2^64, so the unsigned conversion is well defined.
  return static_cast<std::uint64_t>(std::ldexp(static_cast<long double>(p), 64));
}

}  // namespace fitsim
