#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "rwz/parallel.hpp"

namespace rwz::channel {

struct ChannelConfig {
  double snr_db = 3.0;
  double power = 1.0;  // average per-symbol power constraint
  std::uint64_t seed = 0;
};

/// Length-k complex codeword; after normalize_power it satisfies the average
/// power constraint with equality: (1/k)*||symbols||^2 == power.
struct Codeword {
  std::vector<std::complex<double>> symbols;
  int k() const { return static_cast<int>(symbols.size()); }
};

struct NormalizedCodeword {
  Codeword codeword;
  /// Multiplier applied to the raw vector; the decoder divides by this to
  /// get back to the coefficient domain.
  double scale = 1.0;
};

/// Projects raw onto the power sphere: z = sqrt(k*power) * raw / ||raw||.
/// Throws on a zero-norm input.
NormalizedCodeword normalize_power(
    const std::vector<std::complex<double>>& raw, double power);

/// sigma^2 = power / 10^(snr_db/10).
double snr_to_noise_var(double snr_db, double power);

/// At or above this SNR the channel is treated as exactly noiseless.
inline constexpr double kNoiselessSnrDb = 300.0;

/// z + n with n circularly symmetric complex Gaussian of per-symbol
/// variance sigma^2 (sigma^2/2 per real component). Noise sample i is a pure
/// function of (cfg.seed, i), so the output is schedule independent.
std::vector<std::complex<double>> transmit(const Codeword& z,
                                           const ChannelConfig& cfg,
                                           par::Exec ex = par::Exec::Parallel);

/// Channel bandwidth ratio: complex channel uses per source sample.
double cbr(long k, int height, int width, int channels);

/// Debug dump of a complex vector as little-endian f32 (re, im) pairs.
void write_noise_f32(const std::string& path,
                     const std::vector<std::complex<double>>& noise);

}  // namespace rwz::channel
