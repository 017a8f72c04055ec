#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rwz/geometry.hpp"
#include "rwz/parallel.hpp"

namespace rwz::geometry {

namespace {

constexpr double kFdStep = 1e-4;       // finite-difference step, normalized units
constexpr int kMaxRejects = 5;         // consecutive rejected steps => divergence
constexpr int kMinOverlapPixels = 64;  // below this the objective is meaningless

// The optimization runs on the inverse map g: target pixel -> side coords,
// in coordinates scaled so a full frame spans O(1). Params are the first 8
// entries of the normalized matrix (bottom-right pinned to 1).
struct Frame {
  double scale;
  double cx, cy;  // target center
};

Eigen::Matrix3d to_eigen(const Homography& h) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = h(r, c);
  return m;
}

Homography from_eigen(const Eigen::Matrix3d& m) {
  std::array<double, 9> a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a[r * 3 + c] = m(r, c);
  return Homography(a);
}

// Mean squared gray difference between side sampled through g and target,
// over the pixel list; pixels whose sample leaves the side frame contribute
// the current residual 0 (the valid list is fixed by the caller).
void residuals(const Image& target, const Image& side,
               const Eigen::Matrix3d& g, const Frame& fr,
               const std::vector<int>& pixels, std::vector<double>& out) {
  const int w = target.width();
  const double sw = side.width() - 1.0, sh = side.height() - 1.0;
  out.resize(pixels.size());
  par::for_index(static_cast<std::ptrdiff_t>(pixels.size()),
                 [&](std::ptrdiff_t i) {
                   const int p = pixels[i];
                   const double x = p % w, y = p / w;
                   const double nx = (x - fr.cx) / fr.scale;
                   const double ny = (y - fr.cy) / fr.scale;
                   const double den = g(2, 0) * nx + g(2, 1) * ny + g(2, 2);
                   if (std::abs(den) < 1e-12) {
                     out[i] = 0.0;
                     return;
                   }
                   const double qx =
                       (g(0, 0) * nx + g(0, 1) * ny + g(0, 2)) / den * fr.scale +
                       fr.cx;
                   const double qy =
                       (g(1, 0) * nx + g(1, 1) * ny + g(1, 2)) / den * fr.scale +
                       fr.cy;
                   if (qx < 0.0 || qx > sw || qy < 0.0 || qy > sh) {
                     out[i] = 0.0;
                     return;
                   }
                   out[i] = detail::sample_bicubic(side, qx, qy, 0) -
                            target.at(static_cast<int>(y), static_cast<int>(x));
                 });
}

double mse(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  const double s = par::chunked_sum(static_cast<std::ptrdiff_t>(r.size()),
                                    [&](std::ptrdiff_t i) { return r[i] * r[i]; });
  return s / static_cast<double>(r.size());
}

}  // namespace

RefineResult refine_homography(const Image& target, const Image& side,
                               const Homography& h0, const RefineConfig& cfg) {
  RefineResult res;
  res.h = h0;

  const Image tg = target.to_gray();
  const Image sg = side.to_gray();
  const int w = tg.width(), h = tg.height();

  Frame fr{(w + h) / 4.0, (w - 1) / 2.0, (h - 1) / 2.0};
  Eigen::Matrix3d norm = Eigen::Matrix3d::Identity();
  norm(0, 0) = norm(1, 1) = 1.0 / fr.scale;
  norm(0, 2) = -fr.cx / fr.scale;
  norm(1, 2) = -fr.cy / fr.scale;
  const Eigen::Matrix3d norm_inv = norm.inverse();

  // g maps normalized target coords to normalized side coords.
  Eigen::Matrix3d g = norm * to_eigen(h0).inverse() * norm_inv;
  if (std::abs(g(2, 2)) < 1e-9) {
    res.diverged = true;
    return res;
  }
  g /= g(2, 2);

  // Valid pixel set, frozen at h0: target pixels whose mapped point lies
  // at least 2 px inside the side frame so small parameter steps cannot
  // push samples across the border mid-iteration.
  std::vector<int> pixels;
  {
    const Homography g0 = h0.inverse();
    const double sx_max = sg.width() - 3.0, sy_max = sg.height() - 3.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double qx, qy;
        if (!g0.map_checked(x, y, qx, qy)) continue;
        if (qx >= 2.0 && qx <= sx_max && qy >= 2.0 && qy <= sy_max)
          pixels.push_back(y * w + x);
      }
  }
  if (static_cast<int>(pixels.size()) < kMinOverlapPixels) {
    res.diverged = true;
    return res;
  }

  std::vector<double> r, rp, rm, rtrial;
  residuals(tg, sg, g, fr, pixels, r);
  double err = mse(r);
  res.initial_rmse = std::sqrt(err);
  res.final_rmse = res.initial_rmse;

  const auto param = [](Eigen::Matrix3d& m, int j) -> double& {
    return m(j / 3, j % 3);
  };

  double lambda = cfg.damping;
  int rejects = 0;
  bool improved = false;
  double min_trial = std::numeric_limits<double>::infinity();
  Eigen::Matrix3d best = g;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    res.iterations = iter + 1;

    // Central finite-difference Jacobian, column per parameter.
    Eigen::Matrix<double, 8, 8> jtj = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 8, 1> jtr = Eigen::Matrix<double, 8, 1>::Zero();
    std::array<std::vector<double>, 8> cols;
    for (int j = 0; j < 8; ++j) {
      Eigen::Matrix3d gp = g, gm = g;
      param(gp, j) += kFdStep;
      param(gm, j) -= kFdStep;
      residuals(tg, sg, gp, fr, pixels, rp);
      residuals(tg, sg, gm, fr, pixels, rm);
      auto& col = cols[j];
      col.resize(r.size());
      for (std::size_t i = 0; i < r.size(); ++i)
        col[i] = (rp[i] - rm[i]) / (2.0 * kFdStep);
    }
    for (int a = 0; a < 8; ++a) {
      for (int b = a; b < 8; ++b) {
        const double s = par::chunked_sum(
            static_cast<std::ptrdiff_t>(r.size()),
            [&](std::ptrdiff_t i) { return cols[a][i] * cols[b][i]; });
        jtj(a, b) = s;
        jtj(b, a) = s;
      }
      jtr(a) = par::chunked_sum(
          static_cast<std::ptrdiff_t>(r.size()),
          [&](std::ptrdiff_t i) { return cols[a][i] * r[i]; });
    }

    if (jtr.norm() < 1e-14) break;  // flat objective (e.g. textureless)

    bool accepted = false;
    while (rejects < kMaxRejects) {
      const Eigen::Matrix<double, 8, 8> a =
          jtj + lambda * Eigen::Matrix<double, 8, 8>::Identity();
      const Eigen::Matrix<double, 8, 1> delta = a.ldlt().solve(-jtr);
      if (!delta.allFinite()) {
        ++rejects;
        lambda *= 10.0;
        continue;
      }
      Eigen::Matrix3d gt = g;
      for (int j = 0; j < 8; ++j) param(gt, j) += delta(j);
      residuals(tg, sg, gt, fr, pixels, rtrial);
      const double et = mse(rtrial);
      if (et < err) {
        g = gt;
        r = rtrial;
        err = et;
        best = g;
        improved = true;
        lambda = std::max(lambda * 0.1, 1e-12);
        rejects = 0;
        accepted = true;
        if (delta.norm() < cfg.step_tolerance) iter = cfg.max_iterations;
        break;
      }
      min_trial = std::min(min_trial, et);
      ++rejects;
      lambda *= 10.0;
    }
    if (!accepted) break;
  }

  if (!improved) {
    // No step ever lowered the error: keep h0. That is divergence only if
    // the trial steps genuinely worsened the objective; an already-optimal
    // start whose steps merely fail to help is ordinary convergence.
    res.diverged =
        rejects >= kMaxRejects && min_trial > err * (1.0 + 1e-9) + 1e-15;
    return res;
  }

  res.final_rmse = std::sqrt(err);
  try {
    // Map the best normalized inverse back to the side->target transform.
    res.h = from_eigen((norm_inv * best * norm).inverse());
  } catch (...) {
    res.h = h0;
    res.final_rmse = res.initial_rmse;
    res.diverged = true;
  }
  return res;
}

}  // namespace rwz::geometry
