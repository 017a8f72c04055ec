#include "rwz/channel.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "rwz/errors.hpp"
#include "rwz/rng.hpp"

namespace rwz::channel {

NormalizedCodeword normalize_power(const std::vector<std::complex<double>>& raw,
                                   double power) {
  if (power <= 0.0) throw ConfigError("power must be positive");
  if (raw.empty()) throw ConfigError("cannot normalize an empty codeword");
  double norm2 = 0.0;
  for (const auto& s : raw) norm2 += std::norm(s);
  if (norm2 <= 0.0) throw ConfigError("cannot normalize a zero codeword");

  const double k = static_cast<double>(raw.size());
  const double scale = std::sqrt(k * power / norm2);
  NormalizedCodeword out;
  out.scale = scale;
  out.codeword.symbols.reserve(raw.size());
  for (const auto& s : raw) out.codeword.symbols.push_back(s * scale);
  return out;
}

double snr_to_noise_var(double snr_db, double power) {
  if (power <= 0.0) throw ConfigError("power must be positive");
  return power / std::pow(10.0, snr_db / 10.0);
}

std::vector<std::complex<double>> transmit(const Codeword& z,
                                           const ChannelConfig& cfg,
                                           par::Exec ex) {
  std::vector<std::complex<double>> out = z.symbols;
  if (cfg.snr_db >= kNoiselessSnrDb) return out;

  const double sigma2 = snr_to_noise_var(cfg.snr_db, cfg.power);
  const double amp = std::sqrt(sigma2 / 2.0);  // per real component
  par::for_index(ex, static_cast<std::ptrdiff_t>(out.size()),
                 [&](std::ptrdiff_t i) {
                   const auto [re, im] =
                       rng::gaussian_pair(cfg.seed, static_cast<std::uint64_t>(i));
                   out[i] += std::complex<double>(amp * re, amp * im);
                 });
  return out;
}

double cbr(long k, int height, int width, int channels) {
  if (height <= 0 || width <= 0 || channels <= 0)
    throw ConfigError("image dimensions must be positive");
  if (k < 0) throw ConfigError("symbol count must be nonnegative");
  return static_cast<double>(k) /
         (static_cast<double>(height) * width * channels);
}

void write_noise_f32(const std::string& path,
                     const std::vector<std::complex<double>>& noise) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path + " for writing");
  for (const auto& s : noise) {
    const float re = static_cast<float>(s.real());
    const float im = static_cast<float>(s.imag());
    std::uint32_t bits;
    std::memcpy(&bits, &re, 4);
    const std::uint8_t b0[4] = {
        static_cast<std::uint8_t>(bits), static_cast<std::uint8_t>(bits >> 8),
        static_cast<std::uint8_t>(bits >> 16),
        static_cast<std::uint8_t>(bits >> 24)};
    std::fwrite(b0, 1, 4, f);
    std::memcpy(&bits, &im, 4);
    const std::uint8_t b1[4] = {
        static_cast<std::uint8_t>(bits), static_cast<std::uint8_t>(bits >> 8),
        static_cast<std::uint8_t>(bits >> 16),
        static_cast<std::uint8_t>(bits >> 24)};
    std::fwrite(b1, 1, 4, f);
  }
  std::fclose(f);
}

}  // namespace rwz::channel
