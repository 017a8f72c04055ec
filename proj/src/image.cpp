#include "rwz/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "rwz/errors.hpp"

namespace rwz {

namespace {

void check_shape(int h, int w, int c) {
  if (h <= 0 || w <= 0) throw ConfigError("image dimensions must be positive");
  if (c != 1 && c != 3) throw ConfigError("channel count must be 1 or 3");
}

double clamp01(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

Image::Image(int height, int width, int channels, double fill)
    : h_(height), w_(width), c_(channels) {
  check_shape(h_, w_, c_);
  samples_.assign(static_cast<std::size_t>(h_) * w_ * c_, clamp01(fill));
}

Image::Image(int height, int width, int channels, std::vector<double> samples)
    : h_(height), w_(width), c_(channels), samples_(std::move(samples)) {
  check_shape(h_, w_, c_);
  if (samples_.size() != static_cast<std::size_t>(h_) * w_ * c_)
    throw ConfigError("sample buffer does not match image dimensions");
  clamp();
}

Image Image::to_gray() const {
  if (c_ == 1) return *this;
  Image out(h_, w_, 1);
  const std::size_t n = static_cast<std::size_t>(h_) * w_;
  for (std::size_t p = 0; p < n; ++p) {
    const double* px = &samples_[p * 3];
    out.samples_[p] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return out;
}

Image Image::to_rgb() const {
  if (c_ == 3) return *this;
  Image out(h_, w_, 3);
  const std::size_t n = static_cast<std::size_t>(h_) * w_;
  for (std::size_t p = 0; p < n; ++p) {
    const double v = samples_[p];
    out.samples_[p * 3] = v;
    out.samples_[p * 3 + 1] = v;
    out.samples_[p * 3 + 2] = v;
  }
  return out;
}

void Image::clamp() {
  for (double& v : samples_) v = clamp01(v);
}

Mask::Mask(int height, int width, bool fill) : h_(height), w_(width) {
  if (h_ <= 0 || w_ <= 0) throw ConfigError("mask dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(h_) * w_, fill ? 1 : 0);
}

std::size_t Mask::count_true() const {
  return static_cast<std::size_t>(
      std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double Mask::true_fraction() const {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(count_true()) / static_cast<double>(bits_.size());
}

Mask Mask::complement() const {
  Mask out = *this;
  for (auto& b : out.bits_) b ^= 1;
  return out;
}

Mask Mask::from_raster(const Image& raster) {
  if (raster.channels() != 1)
    throw ConfigError("mask raster must be 1-channel");
  Mask out(raster.height(), raster.width());
  for (int y = 0; y < raster.height(); ++y)
    for (int x = 0; x < raster.width(); ++x)
      out.set(y, x, raster.at(y, x) >= 0.5);
  return out;
}

Image Mask::to_raster() const {
  Image out(h_, w_, 1);
  for (int y = 0; y < h_; ++y)
    for (int x = 0; x < w_; ++x) out.at(y, x) = at(y, x) ? 1.0 : 0.0;
  return out;
}

Image apply_mask(const Image& img, const Mask& mask) {
  if (img.height() != mask.height() || img.width() != mask.width())
    throw ConfigError("mask shape does not match image");
  Image out = img;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (!mask.at(y, x))
        for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = 0.0;
  return out;
}

Image residual(const Image& x, const Image& x_star) {
  if (!x.same_shape(x_star))
    throw ConfigError("residual operands must share a shape");
  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = x.samples()[i] - x_star.samples()[i];
  return Image(x.height(), x.width(), x.channels(), std::move(diff));
}

}  // namespace rwz
