#pragma once

#include <vector>

#include "rwz/geometry.hpp"
#include "rwz/image.hpp"
#include "rwz/parallel.hpp"

namespace rwz::reconstruct {

struct BlendConfig {
  int feather_width = 4;        // half-width of the seam blend band, pixels
  bool poisson = false;
  int poisson_iterations = 200;
  double seam_weight_b = 1.0;   // seam/distortion trade-off knob, recorded in
                                // configs for parity; no operation consumes it
};

/// Exact Euclidean distance from each pixel to the nearest mask-true pixel
/// (0 on true pixels, +inf when the mask has none). Row-major H*W.
std::vector<double> distance_to_true(const Mask& m);
std::vector<double> distance_to_false(const Mask& m);

/// Final reconstruction: the side image warped into the source frame fills
/// everything the mask marks receivable, the decoded residual fills the
/// rest, and a distance-weighted convex blend smooths the boundary band.
/// Degenerate masks short-circuit: all-true returns x_tilde, all-false
/// returns the warp.
Image composite(const Image& x_tilde, const Image& y,
                const geometry::Homography& h_star, const Mask& m,
                const BlendConfig& cfg);

/// Gradient-domain touch-up: Jacobi iterations of the discrete Poisson
/// equation over region pixels, matching guide's Laplacian with base's
/// values as fixed boundary conditions. The region must keep a 1-pixel
/// margin from the frame.
Image poisson_correct(const Image& base, const Mask& region,
                      const Image& guide, int iterations,
                      par::Exec ex = par::Exec::Parallel);

/// Seam quality: mean absolute second difference of gray intensity across
/// mask-boundary pixel pairs, measured perpendicular to the boundary.
/// 0 when the image is smooth through every seam (or there is no seam).
double seam_score(const Image& img, const Mask& m);

}  // namespace rwz::reconstruct
