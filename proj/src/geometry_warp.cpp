#include <cmath>

#include "rwz/geometry.hpp"

namespace rwz::geometry {

namespace {

// Catmull-Rom weights for the four taps around fractional position t.
inline void cr_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = -0.5 * t3 + t2 - 0.5 * t;
  w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
  w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
  w[3] = 0.5 * t3 - 0.5 * t2;
}

}  // namespace

namespace detail {

double sample_bicubic(const Image& src, double sx, double sy, int c) {
  const int w = src.width(), h = src.height();
  const int ix = static_cast<int>(std::floor(sx));
  const int iy = static_cast<int>(std::floor(sy));
  if (ix < -2 || ix > w || iy < -2 || iy > h) return 0.0;  // no tap in frame
  double wx[4], wy[4];
  cr_weights(sx - ix, wx);
  cr_weights(sy - iy, wy);
  double acc = 0.0;
  for (int m = 0; m < 4; ++m) {
    const int yy = iy - 1 + m;
    if (yy < 0 || yy >= h) continue;
    double row = 0.0;
    for (int n = 0; n < 4; ++n) {
      const int xx = ix - 1 + n;
      if (xx < 0 || xx >= w) continue;
      row += wx[n] * src.at(yy, xx, c);
    }
    acc += wy[m] * row;
  }
  return acc;
}

}  // namespace detail

Image warp_image_serial(const Image& src, const Homography& h, int out_h,
                        int out_w) {
  const Homography hinv = h.inverse();
  const int ch = src.channels();
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w * ch, 0.0);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double sx, sy;
      if (!hinv.map_checked(x, y, sx, sy)) continue;  // at infinity: leave 0
      for (int c = 0; c < ch; ++c)
        out[(static_cast<std::size_t>(y) * out_w + x) * ch + c] =
            detail::sample_bicubic(src, sx, sy, c);
    }
  }
  return Image(out_h, out_w, ch, std::move(out));
}

Image warp_image(const Image& src, const Homography& h, int out_h, int out_w,
                 par::Exec ex) {
  if (ex == par::Exec::Serial) return warp_image_serial(src, h, out_h, out_w);
  const Homography hinv = h.inverse();
  const int ch = src.channels();
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w * ch, 0.0);
  par::for_index(out_h, [&](std::ptrdiff_t y) {
    double* row = out.data() + static_cast<std::size_t>(y) * out_w * ch;
    for (int x = 0; x < out_w; ++x) {
      double sx, sy;
      if (!hinv.map_checked(x, static_cast<double>(y), sx, sy)) continue;
      for (int c = 0; c < ch; ++c)
        row[static_cast<std::size_t>(x) * ch + c] =
            detail::sample_bicubic(src, sx, sy, c);
    }
  });
  return Image(out_h, out_w, ch, std::move(out));
}

Mask generate_mask(const Homography& side_to_src, int height, int width) {
  const Image ones(height, width, 1, 1.0);
  const Image coverage = warp_image(ones, side_to_src, height, width);
  Mask m(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      m.set(y, x, !(coverage.at(y, x) > 0.5));  // ties transmit
  return m;
}

}  // namespace rwz::geometry
