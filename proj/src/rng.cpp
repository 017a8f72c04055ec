#include "rwz/rng.hpp"

#include <cmath>
#include <numbers>

namespace rwz::rng {

std::pair<double, double> gaussian_pair(std::uint64_t seed,
                                        std::uint64_t index) {
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform01(seed, 2 * index);
  const double u2 = uniform01(seed, 2 * index + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

double Stream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const auto [a, b] = gaussian_pair(seed_, ctr_++);
  spare_ = b;
  has_spare_ = true;
  return a;
}

std::uint64_t Stream::next_below(std::uint64_t n) {
  // Rejection sampling over the largest multiple of n below 2^64.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

}  // namespace rwz::rng
