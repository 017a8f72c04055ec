#include "rwz/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "rwz/errors.hpp"
#include "rwz/parallel.hpp"
#include "rwz/rng.hpp"

namespace rwz::harness {

using geometry::Homography;

namespace {

// One separable box-blur pass (radius 2, clamped edges).
void box_blur(std::vector<double>& v, int h, int w) {
  constexpr int kR = 2;
  std::vector<double> tmp(v.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int d = -kR; d <= kR; ++d)
        s += v[static_cast<std::size_t>(y) * w + std::clamp(x + d, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = s / (2 * kR + 1);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int d = -kR; d <= kR; ++d)
        s += tmp[static_cast<std::size_t>(std::clamp(y + d, 0, h - 1)) * w + x];
      v[static_cast<std::size_t>(y) * w + x] = s / (2 * kR + 1);
    }
}

void smooth(std::vector<double>& v, int h, int w) {
  for (int pass = 0; pass < 3; ++pass) box_blur(v, h, w);
}

void stretch(std::vector<double>& v, double lo, double hi) {
  const auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx - mn < 1e-12) {
    std::fill(v.begin(), v.end(), 0.5 * (lo + hi));
    return;
  }
  for (double& s : v) s = lo + (hi - lo) * (s - mn) / (mx - mn);
}

// Catmull-Rom sample with edge-clamped taps, so the side view keeps real
// texture right up to (and past) the frame edge instead of fading to black.
double sample_clamped(const Image& src, double sx, double sy, int c) {
  const int w = src.width(), h = src.height();
  const int ix = static_cast<int>(std::floor(sx));
  const int iy = static_cast<int>(std::floor(sy));
  const double tx = sx - ix, ty = sy - iy;
  auto weights = [](double t, double out[4]) {
    const double t2 = t * t, t3 = t2 * t;
    out[0] = -0.5 * t3 + t2 - 0.5 * t;
    out[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
    out[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
    out[3] = 0.5 * t3 - 0.5 * t2;
  };
  double wx[4], wy[4];
  weights(tx, wx);
  weights(ty, wy);
  double acc = 0.0;
  for (int m = 0; m < 4; ++m) {
    const int yy = std::clamp(iy - 1 + m, 0, h - 1);
    double row = 0.0;
    for (int n = 0; n < 4; ++n)
      row += wx[n] * src.at(yy, std::clamp(ix - 1 + n, 0, w - 1), c);
    acc += wy[m] * row;
  }
  return acc;
}

}  // namespace

Image textured_base(int height, int width, std::uint64_t seed) {
  if (height < 8 || width < 8)
    throw ConfigError("textured_base needs at least 8x8");
  const std::size_t n = static_cast<std::size_t>(height) * width;

  std::vector<double> luma(n);
  for (std::size_t i = 0; i < n; ++i) luma[i] = rng::uniform01(seed, i);
  smooth(luma, height, width);
  stretch(luma, 0.05, 0.95);

  std::vector<double> out(n * 3);
  for (int c = 0; c < 3; ++c) {
    const std::uint64_t cs = rng::derive(seed, 11 + static_cast<unsigned>(c));
    std::vector<double> tint(n);
    for (std::size_t i = 0; i < n; ++i)
      tint[i] = rng::uniform01(cs, i) - 0.5;
    smooth(tint, height, width);
    for (std::size_t i = 0; i < n; ++i) out[i * 3 + c] = luma[i] + 0.1 * tint[i];
  }
  return Image(height, width, 3, std::move(out));
}

SynthPair synth_pair(const Image& base, const ParallaxSpec& spec) {
  if (base.empty()) throw ConfigError("synth_pair needs a non-empty base");
  if (spec.overlap_target < 0.0 || spec.overlap_target > 1.0)
    throw ConfigError("overlap_target must lie in [0, 1]");
  if (spec.photometric_jitter < 0.0)
    throw ConfigError("photometric_jitter must be non-negative");

  const int ch = base.height() * 2 / 3;
  const int cw = base.width() * 2 / 3;
  if (ch < 32 || cw < 32)
    throw ConfigError("base too small: the central crop must be >= 32x32");
  const int oy = (base.height() - ch) / 2;
  const int ox = (base.width() - cw) / 2;

  SynthPair pair;
  std::vector<double> xs(static_cast<std::size_t>(ch) * cw * base.channels());
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x)
      for (int c = 0; c < base.channels(); ++c)
        xs[(static_cast<std::size_t>(y) * cw + x) * base.channels() + c] =
            base.at(y + oy, x + ox, c);
  pair.x = Image(ch, cw, base.channels(), std::move(xs));

  const bool plain = spec.rotation_deg == 0.0 && spec.perspective_strength == 0.0;
  const double cx = (cw - 1) / 2.0, cy = (ch - 1) / 2.0;

  rng::Stream params(rng::derive(spec.seed, 0x5A1));
  const double theta = params.next_uniform(0.0, 2.0 * std::numbers::pi);
  const double sign = (params.next_u64() & 1) ? 1.0 : -1.0;
  const double u1 = params.next_uniform(-1.0, 1.0);
  const double u2 = params.next_uniform(-1.0, 1.0);

  const double alpha = sign * spec.rotation_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  auto view_at = [&](double t) {
    std::array<double, 9> m{ca, -sa, cx - ca * cx + sa * cy,
                            sa, ca,  cy - sa * cx - ca * cy,
                            spec.perspective_strength * u1 / cw,
                            spec.perspective_strength * u2 / ch, 1.0};
    const Homography inner(m);
    const std::array<double, 9> shift{1.0, 0.0, t * std::cos(theta),
                                      0.0, 1.0, t * std::sin(theta),
                                      0.0, 0.0, 1.0};
    return Homography(shift).compose(inner);
  };
  auto covered = [&](const Homography& h) {
    return 1.0 - geometry::generate_mask(h, ch, cw).true_fraction();
  };

  if (spec.overlap_target >= 1.0 && plain) {
    pair.h_true = Homography::identity();
  } else if (spec.overlap_target <= 0.0) {
    // Fully disjoint views: a diameter-length shift guarantees zero coverage.
    pair.h_true = view_at(cw + ch);
  } else {
    double lo = 0.0, hi = cw + ch, t = 0.0;
    double cov = covered(view_at(0.0));
    if (cov > spec.overlap_target) {
      for (int it = 0; it < 40; ++it) {
        t = 0.5 * (lo + hi);
        cov = covered(view_at(t));
        if (std::abs(cov - spec.overlap_target) <= 0.01) break;
        (cov > spec.overlap_target ? lo : hi) = t;
      }
    }
    pair.h_true = view_at(t);
    if (std::abs(cov - spec.overlap_target) > 0.05)
      throw ConfigError("overlap target unreachable for these view parameters");
  }

  const int bc = base.channels();
  std::vector<double> ys(static_cast<std::size_t>(ch) * cw * bc);
  const double jit = spec.photometric_jitter;
  const std::uint64_t jseed = rng::derive(spec.seed, 0x7E1);
  const Homography& h = pair.h_true;
  par::for_index(ch, [&](std::ptrdiff_t y) {
    for (int x = 0; x < cw; ++x) {
      double px, py;
      const bool finite = h.map_checked(x, static_cast<double>(y), px, py);
      for (int c = 0; c < bc; ++c) {
        const std::size_t i =
            (static_cast<std::size_t>(y) * cw + x) * bc + c;
        double v = finite ? sample_clamped(base, px + ox, py + oy, c) : 0.0;
        if (jit > 0.0) v += rng::uniform(jseed, i, -jit, jit);
        ys[i] = v;
      }
    }
  });
  pair.y = Image(ch, cw, bc, std::move(ys));
  return pair;
}

}  // namespace rwz::harness
