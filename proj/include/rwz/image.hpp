#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rwz {

/// Dense H x W x C raster with real samples in [0, 1], laid out row-major
/// with interleaved channels. C is 1 (gray) or 3 (RGB). Values passed to a
/// constructor are clamped into range (NaN becomes 0), so an Image is valid
/// from birth; treat instances as immutable once shared across threads.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);
  Image(int height, int width, int channels, std::vector<double> samples);

  int height() const { return h_; }
  int width() const { return w_; }
  int channels() const { return c_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  double at(int y, int x, int c = 0) const {
    return samples_[index(y, x, c)];
  }
  double& at(int y, int x, int c = 0) { return samples_[index(y, x, c)]; }

  const std::vector<double>& samples() const { return samples_; }
  std::vector<double>& samples() { return samples_; }

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * w_ + x) * c_ + c;
  }

  bool same_shape(const Image& o) const {
    return h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
  }

  /// Rec.601 luma (0.299 R + 0.587 G + 0.114 B); identity for 1-channel.
  Image to_gray() const;

  /// Replicates a gray image across 3 channels; identity for 3-channel.
  Image to_rgb() const;

  /// Clamps every sample into [0, 1], mapping NaN to 0.
  void clamp();

 private:
  int h_ = 0, w_ = 0, c_ = 0;
  std::vector<double> samples_;
};

/// Per-pixel boolean raster; true marks a pixel the encoder must transmit.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, bool fill = false);

  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int y, int x) const {
    return bits_[static_cast<std::size_t>(y) * w_ + x] != 0;
  }
  void set(int y, int x, bool v) {
    bits_[static_cast<std::size_t>(y) * w_ + x] = v ? 1 : 0;
  }

  std::size_t count_true() const;
  double true_fraction() const;
  Mask complement() const;

  bool all_true() const { return count_true() == bits_.size(); }
  bool all_false() const { return count_true() == 0; }

  /// Interprets a 1-channel raster in the 0/255-style convention:
  /// samples >= 0.5 map to true.
  static Mask from_raster(const Image& raster);

  /// Inverse of from_raster: true -> 1.0, false -> 0.0.
  Image to_raster() const;

  const std::vector<std::uint8_t>& bits() const { return bits_; }

 private:
  int h_ = 0, w_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Reads a PNG (8-bit gray or RGB) or binary PPM/PGM file; the format is
/// detected from the leading magic bytes. Throws IoError on failure.
Image load_image(const std::string& path);

/// Writes PNG, PPM, or PGM depending on the file extension. Samples are
/// quantized to 8 bits; a second save of the loaded result is byte-stable.
void save_image(const Image& img, const std::string& path);

/// Keeps samples where the mask is true and zeroes the rest.
Image apply_mask(const Image& img, const Mask& mask);

/// Element-wise x - x_star, clamped into [0, 1]. When x_star was produced
/// by apply_mask(x, complement(m)) this is exactly apply_mask(x, m).
Image residual(const Image& x, const Image& x_star);

}  // namespace rwz
