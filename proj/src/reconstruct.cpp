#include "rwz/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwz/errors.hpp"

namespace rwz::reconstruct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb-Huttenlocher), one pass of the
// exact squared Euclidean distance transform. Infinite f values are
// non-sites and contribute no parabola.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n,
            std::vector<int>& v, std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.begin() + n, kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

std::vector<double> edt_squared(const Mask& m, bool to_true) {
  const int h = m.height(), w = m.width();
  std::vector<double> grid(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      grid[static_cast<std::size_t>(y) * w + x] =
          m.at(y, x) == to_true ? 0.0 : kInf;

  // Columns, then rows.
  par::for_index(w, [&](std::ptrdiff_t x) {
    std::vector<double> f(h), d(h), z(h + 1);
    std::vector<int> v(h);
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(f, d, h, v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  });
  par::for_index(h, [&](std::ptrdiff_t y) {
    std::vector<double> f(w), d(w), z(w + 1);
    std::vector<int> v(w);
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
    edt_1d(f, d, w, v, z);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
  });
  return grid;
}

}  // namespace

std::vector<double> distance_to_true(const Mask& m) {
  auto d = edt_squared(m, true);
  for (auto& v : d) v = v == kInf ? kInf : std::sqrt(v);
  return d;
}

std::vector<double> distance_to_false(const Mask& m) {
  auto d = edt_squared(m, false);
  for (auto& v : d) v = v == kInf ? kInf : std::sqrt(v);
  return d;
}

Image composite(const Image& x_tilde, const Image& y,
                const geometry::Homography& h_star, const Mask& m,
                const BlendConfig& cfg) {
  if (x_tilde.height() != m.height() || x_tilde.width() != m.width())
    throw ConfigError("mask shape does not match the residual image");
  if (cfg.feather_width < 0)
    throw ConfigError("feather width must be nonnegative");
  if (cfg.feather_width > std::min(m.height(), m.width()) / 4)
    throw ConfigError("feather width too large for the frame");

  if (m.all_true()) return x_tilde;  // nothing receivable from the side
  const Image yhat =
      warp_image(y, h_star, x_tilde.height(), x_tilde.width());
  const Image yhat_c = yhat.channels() == x_tilde.channels()
                           ? yhat
                           : (x_tilde.channels() == 3 ? yhat.to_rgb()
                                                      : yhat.to_gray());
  if (m.all_false()) return yhat_c;

  const int h = x_tilde.height(), w = x_tilde.width(), ch = x_tilde.channels();
  const auto d_true = distance_to_true(m);
  const auto d_false = distance_to_false(m);

  Image out(h, w, ch);
  const double f = static_cast<double>(cfg.feather_width);
  par::for_index(h, [&](std::ptrdiff_t y_) {
    const int yy = static_cast<int>(y_);
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(yy) * w + x;
      // Signed distance to the seam: positive inside the transmitted region.
      const double sd = m.at(yy, x) ? d_false[p] : -d_true[p];
      double wgt;
      if (f == 0.0)
        wgt = sd > 0.0 ? 1.0 : 0.0;
      else
        wgt = std::clamp(0.5 + sd / (2.0 * f), 0.0, 1.0);
      for (int c = 0; c < ch; ++c)
        out.at(yy, x, c) =
            wgt * x_tilde.at(yy, x, c) + (1.0 - wgt) * yhat_c.at(yy, x, c);
    }
  });
  out.clamp();

  if (cfg.poisson) {
    // Re-solve the receivable-side band against the warped side's gradient
    // field to undo the feather's pull toward the empty residual. The two
    // rings nearest the seam stay put — they are the blend transition the
    // solve anchors to, so the seam itself is never disturbed.
    const double band = std::max<double>(cfg.feather_width, 2.0);
    Mask region(h, w, false);
    for (int yy = 1; yy < h - 1; ++yy)
      for (int x = 1; x < w - 1; ++x) {
        const double d = d_true[static_cast<std::size_t>(yy) * w + x];
        if (!m.at(yy, x) && d > 2.0 && d <= band) region.set(yy, x, true);
      }
    if (!region.all_false())
      out = poisson_correct(out, region, yhat_c, cfg.poisson_iterations);
  }
  return out;
}

Image poisson_correct(const Image& base, const Mask& region,
                      const Image& guide, int iterations, par::Exec ex) {
  if (!base.same_shape(guide))
    throw ConfigError("base and guide must share a shape");
  if (base.height() != region.height() || base.width() != region.width())
    throw ConfigError("region shape does not match image");
  if (iterations <= 0) throw ConfigError("iterations must be positive");

  const int h = base.height(), w = base.width(), ch = base.channels();
  for (int x = 0; x < w; ++x)
    if (region.at(0, x) || region.at(h - 1, x))
      throw ConfigError("region touches the frame border");
  for (int y = 0; y < h; ++y)
    if (region.at(y, 0) || region.at(y, w - 1))
      throw ConfigError("region touches the frame border");
  if (region.all_false()) return base;

  std::vector<int> px;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x)
      if (region.at(y, x)) px.push_back(y * w + x);

  static constexpr int dy[4] = {-1, 1, 0, 0};
  static constexpr int dx[4] = {0, 0, -1, 1};

  std::vector<double> cur = base.samples(), next = base.samples();
  for (int it = 0; it < iterations; ++it) {
    par::for_index(ex, static_cast<std::ptrdiff_t>(px.size()),
                   [&](std::ptrdiff_t i) {
                     const int p = px[i];
                     const int y = p / w, x = p % w;
                     for (int c = 0; c < ch; ++c) {
                       double nb = 0.0, gnb = 0.0;
                       for (int k = 0; k < 4; ++k) {
                         const int qy = y + dy[k], qx = x + dx[k];
                         nb += cur[(static_cast<std::size_t>(qy) * w + qx) * ch + c];
                         gnb += guide.at(qy, qx, c);
                       }
                       const std::size_t idx =
                           (static_cast<std::size_t>(y) * w + x) * ch + c;
                       next[idx] = (nb + 4.0 * guide.at(y, x, c) - gnb) / 4.0;
                     }
                   });
    std::swap(cur, next);
  }
  return Image(h, w, ch, std::move(cur));
}

double seam_score(const Image& img, const Mask& m) {
  if (img.height() != m.height() || img.width() != m.width())
    throw ConfigError("mask shape does not match image");
  const Image gray = img.to_gray();
  const int h = gray.height(), w = gray.width();

  static constexpr int dy[4] = {-1, 1, 0, 0};
  static constexpr int dx[4] = {0, 0, -1, 1};

  double sum = 0.0;
  long terms = 0;
  const auto sample = [&](int y, int x, bool& ok) {
    if (y < 0 || y >= h || x < 0 || x >= w) {
      ok = false;
      return 0.0;
    }
    return gray.at(y, x);
  };

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m.at(y, x)) continue;
      for (int k = 0; k < 4; ++k) {
        const int qy = y + dy[k], qx = x + dx[k];
        if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
        if (m.at(qy, qx)) continue;  // (p true, q false) crossing pairs only
        const double b = gray.at(y, x), c = gray.at(qy, qx);
        bool ok = true;
        const double a = sample(y - dy[k], x - dx[k], ok);
        if (ok) {
          sum += std::abs(a - 2.0 * b + c);
          ++terms;
        }
        ok = true;
        const double e = sample(qy + dy[k], qx + dx[k], ok);
        if (ok) {
          sum += std::abs(b - 2.0 * c + e);
          ++terms;
        }
      }
    }
  return terms == 0 ? 0.0 : sum / static_cast<double>(terms);
}

}  // namespace rwz::reconstruct
