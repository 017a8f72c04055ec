#pragma once

#include <cstddef>
#include <optional>

#include "rwz/channel.hpp"
#include "rwz/codec.hpp"
#include "rwz/geometry.hpp"
#include "rwz/image.hpp"
#include "rwz/reconstruct.hpp"

namespace rwz::harness {

struct PipelineConfig {
  geometry::RansacConfig ransac;
  geometry::RefineConfig refine;
  reconstruct::BlendConfig blend;
  channel::ChannelConfig channel;
  long budget_k = 6095;  // complex channel uses (CBR 0.031 at 256x256 RGB)
  int block_size = 8;
  codec::DimensionBank bank = codec::DimensionBank::default_bank();
  double q = 0.02;  // entropy-model scale for rate allocation

  // Estimation-stage knobs.
  int max_keypoints = 500;
  double detect_threshold = 1e-8;
  double match_ratio = 0.75;
  int min_matches = 8;          // fewer correspondences -> full-mask fallback
  double fallback_rmse = 0.15;  // refined alignment worse than this -> fallback

  /// Baseline switch: skip estimation and transmit every pixel.
  bool force_full_mask = false;
  /// Externally supplied side-to-source transform (skips detection/RANSAC;
  /// the transform is still photometrically refined).
  std::optional<geometry::Homography> fixed_h;
};

struct TrialReport {
  double psnr_db = 0.0;
  double ms_ssim = 0.0;
  double cbr = 0.0;
  std::size_t metadata_bytes = 0;
  double seam = 0.0;
  double snr_db = 0.0;
  /// Mean corner-transfer distance (px) between the estimated and true
  /// side-to-source transforms; NaN when no ground truth was given or no
  /// estimate was produced.
  double homography_error;

  // Diagnostics beyond the CSV columns.
  bool fallback = false;
  double mask_true_fraction = 0.0;
  long symbols = 0;

  TrialReport();
};

/// One end-to-end transmission: estimate the side-to-source transform from
/// the images (unless fixed or disabled), derive the transmit mask, code the
/// masked source over the AWGN channel, composite with the warped side view,
/// and score against the original. Estimation failures of any kind degrade
/// to the all-true mask (transmit everything) and are flagged in the report.
/// When x_hat_out is non-null it receives the reconstruction.
TrialReport run_pipeline(const Image& x, const Image& y,
                         const PipelineConfig& cfg,
                         const geometry::Homography* h_true = nullptr,
                         Image* x_hat_out = nullptr);

}  // namespace rwz::harness
