#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rwz/errors.hpp"
#include "rwz/geometry.hpp"
#include "rwz/rng.hpp"

namespace rwz::geometry {

namespace {

constexpr double kDetFloor = 1e-12;
constexpr double kScaleEps = 1e-9;  // below this, m22 is treated as zero

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& row_major) : m_(row_major) {
  for (double v : m_)
    if (!std::isfinite(v)) throw EstimationError("non-finite homography entry");
  normalize_scale();
  if (std::abs(det3(m_)) < kDetFloor)
    throw EstimationError("homography is numerically singular");
}

void Homography::normalize_scale() {
  if (std::abs(m_[8]) > kScaleEps) {
    const double inv = 1.0 / m_[8];
    for (double& v : m_) v *= inv;
    m_[8] = 1.0;
    return;
  }
  double fro = 0.0;
  for (double v : m_) fro += v * v;
  fro = std::sqrt(fro);
  if (fro < kDetFloor)
    throw EstimationError("homography is numerically singular");
  for (double& v : m_) v /= fro;
}

double Homography::det() const { return det3(m_); }

Homography Homography::inverse() const {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = m_[r * 3 + c];
  const Eigen::Matrix3d inv = m.inverse();
  std::array<double, 9> out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r * 3 + c] = inv(r, c);
  return Homography(out);
}

Homography Homography::compose(const Homography& inner) const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m_[r * 3 + k] * inner.m_[k * 3 + c];
      out[r * 3 + c] = s;
    }
  return Homography(out);
}

bool Homography::map_checked(double x, double y, double& ox, double& oy) const {
  const double den = m_[6] * x + m_[7] * y + m_[8];
  if (std::abs(den) < kDetFloor) return false;
  ox = (m_[0] * x + m_[1] * y + m_[2]) / den;
  oy = (m_[3] * x + m_[4] * y + m_[5]) / den;
  return true;
}

std::array<double, 2> Homography::map(double x, double y) const {
  double ox, oy;
  if (!map_checked(x, y, ox, oy))
    throw EstimationError("point maps to infinity");
  return {ox, oy};
}

std::array<double, 2> warp_point(const Homography& h, double x, double y) {
  return h.map(x, y);
}

Homography dlt_solve(const std::vector<features::MatchPair>& pairs) {
  const int n = static_cast<int>(pairs.size());
  if (n < 4) throw EstimationError("need at least 4 correspondences");

  // Hartley normalization of both point sets: centroid at the origin,
  // mean distance sqrt(2).
  double c1x = 0, c1y = 0, c2x = 0, c2y = 0;
  for (const auto& p : pairs) {
    c1x += p.x1;
    c1y += p.y1;
    c2x += p.x2;
    c2y += p.y2;
  }
  c1x /= n; c1y /= n; c2x /= n; c2y /= n;
  double s1 = 0, s2 = 0;
  for (const auto& p : pairs) {
    s1 += std::hypot(p.x1 - c1x, p.y1 - c1y);
    s2 += std::hypot(p.x2 - c2x, p.y2 - c2y);
  }
  s1 /= n; s2 /= n;
  if (s1 < 1e-12 || s2 < 1e-12)
    throw EstimationError("correspondences are degenerate (coincident points)");
  const double f1 = std::sqrt(2.0) / s1;
  const double f2 = std::sqrt(2.0) / s2;

  Eigen::MatrixXd a(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const double u = (pairs[i].x1 - c1x) * f1;
    const double v = (pairs[i].y1 - c1y) * f1;
    const double up = (pairs[i].x2 - c2x) * f2;
    const double vp = (pairs[i].y2 - c2y) * f2;
    a.row(2 * i) << -u, -v, -1, 0, 0, 0, up * u, up * v, up;
    a.row(2 * i + 1) << 0, 0, 0, -u, -v, -1, vp * u, vp * v, vp;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // With exactly 4 points the system is 8x9; rank below 8 (relative to the
  // largest singular value) means the configuration is degenerate.
  if (sv(0) < 1e-14 || sv(7) / sv(0) < 1e-10)
    throw EstimationError("correspondences are rank-deficient");

  const Eigen::VectorXd hn = svd.matrixV().col(8);
  Eigen::Matrix3d hmat;
  hmat << hn(0), hn(1), hn(2), hn(3), hn(4), hn(5), hn(6), hn(7), hn(8);

  // Undo the normalization: H = T2^-1 * Hn * T1.
  Eigen::Matrix3d t1, t2inv;
  t1 << f1, 0, -f1 * c1x, 0, f1, -f1 * c1y, 0, 0, 1;
  t2inv << 1.0 / f2, 0, c2x, 0, 1.0 / f2, c2y, 0, 0, 1;
  const Eigen::Matrix3d full = t2inv * hmat * t1;

  std::array<double, 9> out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r * 3 + c] = full(r, c);
  return Homography(out);
}

namespace {

// Symmetric transfer error in pixels; infinite when either direction
// degenerates.
double transfer_error(const Homography& h, const Homography& hinv,
                      const features::MatchPair& p) {
  double fx, fy, bx, by;
  if (!h.map_checked(p.x1, p.y1, fx, fy) ||
      !hinv.map_checked(p.x2, p.y2, bx, by))
    return std::numeric_limits<double>::infinity();
  return 0.5 * (std::hypot(fx - p.x2, fy - p.y2) +
                std::hypot(bx - p.x1, by - p.y1));
}

bool sample_degenerate(const std::vector<features::MatchPair>& pairs,
                       const std::array<int, 4>& pick) {
  // Any three collinear points (in either image) make the 4-point DLT
  // rank-deficient; triangle areas catch that cheaply.
  const auto area = [](double ax, double ay, double bx, double by, double cx,
                       double cy) {
    return std::abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
  };
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) {
        const auto& a = pairs[pick[i]];
        const auto& b = pairs[pick[j]];
        const auto& c = pairs[pick[k]];
        if (area(a.x1, a.y1, b.x1, b.y1, c.x1, c.y1) < 1e-9) return true;
        if (area(a.x2, a.y2, b.x2, b.y2, c.x2, c.y2) < 1e-9) return true;
      }
  return false;
}

}  // namespace

RansacResult ransac_homography(const std::vector<features::MatchPair>& pairs,
                               const RansacConfig& cfg) {
  const int n = static_cast<int>(pairs.size());
  if (n < 4) throw EstimationError("need at least 4 correspondences");
  if (cfg.max_iterations <= 0 || cfg.inlier_threshold <= 0)
    throw ConfigError("ransac config out of range");

  int best_count = -1;
  double best_err = std::numeric_limits<double>::infinity();
  std::vector<int> best_inliers;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    // Each iteration owns an independent substream, so results do not
    // depend on how iterations are interleaved.
    rng::Stream s(rng::derive(cfg.seed, static_cast<std::uint64_t>(iter)));

    std::array<int, 4> pick{};
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
      for (int i = 0; i < 4; ++i) {
        bool dup = true;
        while (dup) {
          pick[i] = static_cast<int>(s.next_below(n));
          dup = false;
          for (int j = 0; j < i; ++j) dup |= pick[j] == pick[i];
        }
      }
      ok = !sample_degenerate(pairs, pick);
    }
    if (!ok) continue;

    Homography h;
    Homography hinv;
    try {
      h = dlt_solve({pairs[pick[0]], pairs[pick[1]], pairs[pick[2]],
                     pairs[pick[3]]});
      hinv = h.inverse();
    } catch (const EstimationError&) {
      continue;
    }

    int count = 0;
    double errsum = 0.0;
    for (const auto& p : pairs) {
      const double e = transfer_error(h, hinv, p);
      if (e < cfg.inlier_threshold) {
        ++count;
        errsum += e;
      }
    }
    if (count > best_count ||
        (count == best_count && count > 0 && errsum < best_err)) {
      best_count = count;
      best_err = errsum;
      best_inliers.clear();
      for (int i = 0; i < n; ++i)
        if (transfer_error(h, hinv, pairs[i]) < cfg.inlier_threshold)
          best_inliers.push_back(i);
    }
  }

  if (best_count < 4 ||
      best_count < cfg.min_inlier_ratio * static_cast<double>(n))
    throw EstimationError("no consensus reached");

  std::vector<features::MatchPair> consensus;
  consensus.reserve(best_inliers.size());
  for (int i : best_inliers) consensus.push_back(pairs[i]);
  RansacResult out;
  out.h = dlt_solve(consensus);

  // Recompute membership under the re-solved model for reporting.
  const Homography hinv = out.h.inverse();
  for (int i = 0; i < n; ++i)
    if (transfer_error(out.h, hinv, pairs[i]) < cfg.inlier_threshold)
      out.inlier_indices.push_back(i);
  if (out.inlier_indices.size() < 4) out.inlier_indices = best_inliers;
  return out;
}

void save_homography(const std::string& path, const Homography& h) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path + " for writing");
  for (int r = 0; r < 3; ++r)
    std::fprintf(f, "%.17g %.17g %.17g\n", h(r, 0), h(r, 1), h(r, 2));
  std::fclose(f);
}

Homography load_homography(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::array<double, 9> m;
  for (double& v : m)
    if (!(f >> v)) throw IoError(path + ": expected 9 numeric entries");
  return Homography(m);
}

}  // namespace rwz::geometry
