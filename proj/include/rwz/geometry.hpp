#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rwz/features.hpp"
#include "rwz/image.hpp"
#include "rwz/parallel.hpp"

namespace rwz::geometry {

/// Plane projective transform stored row-major. Construction normalizes the
/// scale: the bottom-right entry becomes 1 when it is not vanishingly small,
/// otherwise the matrix is scaled to unit Frobenius norm. Matrices whose
/// determinant magnitude falls below 1e-12 are rejected.
class Homography {
 public:
  Homography();  // identity
  explicit Homography(const std::array<double, 9>& row_major);

  static Homography identity() { return Homography(); }

  double operator()(int r, int c) const { return m_[r * 3 + c]; }
  const std::array<double, 9>& values() const { return m_; }

  double det() const;
  Homography inverse() const;

  /// this o inner: applies `inner` first.
  Homography compose(const Homography& inner) const;

  /// Maps (x, y); throws EstimationError when the point lands at infinity.
  std::array<double, 2> map(double x, double y) const;

  /// Non-throwing variant; returns false when the denominator vanishes.
  bool map_checked(double x, double y, double& ox, double& oy) const;

 private:
  std::array<double, 9> m_;
  void normalize_scale();
};

std::array<double, 2> warp_point(const Homography& h, double x, double y);

/// Direct linear transform from at least 4 correspondences (p1 -> p2),
/// with coordinate normalization for conditioning. Throws EstimationError
/// when the system is rank-deficient (e.g. collinear points).
Homography dlt_solve(const std::vector<features::MatchPair>& pairs);

struct RansacConfig {
  int max_iterations = 2000;
  double inlier_threshold = 5.0;   // symmetric transfer error, pixels
  double min_inlier_ratio = 0.15;  // below this the estimate is rejected
  std::uint64_t seed = 0;
};

struct RansacResult {
  Homography h;
  std::vector<int> inlier_indices;
};

/// Seeded robust fit: minimal 4-point samples scored by symmetric transfer
/// error, final model re-solved on the best consensus set. Deterministic for
/// a fixed (input, config). Throws EstimationError when no model reaches
/// min_inlier_ratio.
RansacResult ransac_homography(const std::vector<features::MatchPair>& pairs,
                               const RansacConfig& cfg);

/// Samples `src` at h-mapped coordinates to fill an out_h x out_w image.
/// Bicubic (Catmull-Rom) interpolation, zero outside the source frame.
/// Exact for the identity transform.
Image warp_image(const Image& src, const Homography& h, int out_h, int out_w,
                 par::Exec ex = par::Exec::Parallel);

/// Reference single-thread implementation of warp_image.
Image warp_image_serial(const Image& src, const Homography& h, int out_h,
                        int out_w);

/// Pixels the side view cannot predict: warps a constant-1 raster through
/// `side_to_src` and marks pixels whose interpolated coverage is <= 0.5 as
/// must-transmit. Ties transmit.
Mask generate_mask(const Homography& side_to_src, int height, int width);

struct RefineConfig {
  int max_iterations = 30;
  double step_tolerance = 1e-6;  // stop when the parameter step is smaller
  double damping = 1e-3;         // initial Levenberg term
};

struct RefineResult {
  Homography h;
  int iterations = 0;
  bool diverged = false;
  double initial_rmse = 0.0;
  double final_rmse = 0.0;
};

/// Photometric alignment polish: damped Gauss-Newton on all 8 projective
/// parameters, minimizing the mean squared gray-level difference between
/// warp(side, h) and target over pixels the warp covers. Never returns a
/// transform with higher photometric error than the input; if no step is
/// accepted the input comes back with `diverged` set.
RefineResult refine_homography(const Image& target, const Image& side,
                               const Homography& h0, const RefineConfig& cfg);

namespace detail {
/// Catmull-Rom sample of channel c at fractional position (sx, sy);
/// taps outside the frame contribute 0.
double sample_bicubic(const Image& src, double sx, double sy, int c);
}  // namespace detail

/// Writes 9 ASCII decimals, row-major, one row per line.
void save_homography(const std::string& path, const Homography& h);

/// Reads the save_homography format (any whitespace layout) and
/// re-normalizes the scale.
Homography load_homography(const std::string& path);

}  // namespace rwz::geometry
