#include "rwz/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "rwz/errors.hpp"
#include "rwz/parallel.hpp"

namespace rwz::harness {

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ConfigError("psnr needs equal shapes");
  const auto& pa = a.samples();
  const auto& pb = b.samples();
  const double sse = par::chunked_sum(
      static_cast<std::ptrdiff_t>(pa.size()), [&](std::ptrdiff_t i) {
        const double d = pa[i] - pb[i];
        return d * d;
      });
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(pa.size());
  return 10.0 * std::log10(1.0 / mse);
}

double psnr_capped(const Image& a, const Image& b) {
  return std::min(psnr(a, b), kPsnrCap);
}

namespace {

constexpr int kWindow = 11;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr std::array<double, 5> kWeights{0.0448, 0.2856, 0.3001, 0.2363,
                                         0.1333};

std::array<double, kWindow> gauss_window() {
  std::array<double, kWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Plane from_gray(const Image& img) {
  const Image g = img.to_gray();
  return {g.height(), g.width(), g.samples()};
}

// Separable valid-region convolution with the 11-tap Gaussian.
Plane conv_valid(const Plane& p, const std::array<double, kWindow>& k) {
  Plane tmp{p.h, p.w - kWindow + 1, {}};
  tmp.v.resize(static_cast<std::size_t>(tmp.h) * tmp.w);
  par::for_index(tmp.h, [&](std::ptrdiff_t y) {
    for (int x = 0; x < tmp.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += k[i] * p.at(static_cast<int>(y), x + i);
      tmp.v[static_cast<std::size_t>(y) * tmp.w + x] = s;
    }
  });
  Plane out{p.h - kWindow + 1, tmp.w, {}};
  out.v.resize(static_cast<std::size_t>(out.h) * out.w);
  par::for_index(out.h, [&](std::ptrdiff_t y) {
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += k[i] * tmp.at(static_cast<int>(y) + i, x);
      out.v[static_cast<std::size_t>(y) * out.w + x] = s;
    }
  });
  return out;
}

Plane downsample2(const Plane& p) {
  Plane out{p.h / 2, p.w / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.h) * out.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.v[static_cast<std::size_t>(y) * out.w + x] =
          0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) +
                  p.at(2 * y + 1, 2 * x) + p.at(2 * y + 1, 2 * x + 1));
  return out;
}

Plane mul(const Plane& a, const Plane& b) {
  Plane out = a;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
  return out;
}

// Mean luminance and contrast-structure terms at one scale.
void ssim_terms(const Plane& a, const Plane& b, double& lum, double& cs) {
  const auto k = gauss_window();
  const Plane mu_a = conv_valid(a, k), mu_b = conv_valid(b, k);
  const Plane saa = conv_valid(mul(a, a), k);
  const Plane sbb = conv_valid(mul(b, b), k);
  const Plane sab = conv_valid(mul(a, b), k);

  double lsum = 0.0, csum = 0.0;
  const std::size_t n = mu_a.v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double ma = mu_a.v[i], mb = mu_b.v[i];
    const double va = saa.v[i] - ma * ma;
    const double vb = sbb.v[i] - mb * mb;
    const double vab = sab.v[i] - ma * mb;
    lsum += (2.0 * ma * mb + kC1) / (ma * ma + mb * mb + kC1);
    csum += (2.0 * vab + kC2) / (va + vb + kC2);
  }
  lum = lsum / static_cast<double>(n);
  cs = csum / static_cast<double>(n);
}

}  // namespace

double ms_ssim(const Image& a, const Image& b, int* scales_used) {
  if (!a.same_shape(b)) throw ConfigError("ms_ssim needs equal shapes");

  Plane pa = from_gray(a), pb = from_gray(b);
  // Each scale needs a full window; each coarser scale halves the frame.
  int scales = 0;
  for (int dim = std::min(pa.h, pa.w); dim >= kWindow && scales < 5; dim /= 2)
    ++scales;
  if (scales == 0) throw ConfigError("image too small for the ssim window");
  if (scales_used) *scales_used = scales;

  double wsum = 0.0;
  for (int s = 0; s < scales; ++s) wsum += kWeights[s];

  double score = 1.0;
  for (int s = 0; s < scales; ++s) {
    double lum, cs;
    ssim_terms(pa, pb, lum, cs);
    const double wexp = kWeights[s] / wsum;
    if (s == scales - 1)
      score *= std::pow(std::max(lum, 0.0), wexp) *
               std::pow(std::max(cs, 0.0), wexp);
    else
      score *= std::pow(std::max(cs, 0.0), wexp);
    if (s + 1 < scales) {
      pa = downsample2(pa);
      pb = downsample2(pb);
    }
  }
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace rwz::harness
