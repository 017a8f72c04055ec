#pragma once

#include <cstdint>
#include <utility>

namespace rwz::rng {

// Counter-based generator: sample i of stream `seed` is a pure function of
// (seed, i), so parallel loops can draw their own values without any shared
// state and produce the same sequence under any schedule.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Raw 64-bit draw at position `index` of stream `seed`.
constexpr std::uint64_t at(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ 0x6A09E667F3BCC909ULL) ^
                    splitmix64(index + 0xB7E151628AED2A6BULL));
}

/// Derives an independent child stream, e.g. one per trial or iteration.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(at(seed, salt) ^ 0x3C6EF372FE94F82BULL);
}

/// Uniform draw in [0, 1) with 53-bit resolution.
constexpr double uniform01(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(at(seed, index) >> 11) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t seed, std::uint64_t index, double lo,
                         double hi) {
  return lo + (hi - lo) * uniform01(seed, index);
}

/// One standard-normal pair via Box-Muller; consumes positions 2*index
/// and 2*index+1 of the stream.
std::pair<double, double> gaussian_pair(std::uint64_t seed,
                                        std::uint64_t index);

/// Stateful convenience wrapper over the counter scheme for serial code.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return at(seed_, ctr_++); }
  double next_uniform01() { return uniform01(seed_, ctr_++); }
  double next_uniform(double lo, double hi) {
    return uniform(seed_, ctr_++, lo, hi);
  }
  double next_gaussian();
  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rwz::rng
