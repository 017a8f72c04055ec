#include "rwz/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rwz/errors.hpp"
#include "rwz/features.hpp"
#include "rwz/metrics.hpp"

namespace rwz::harness {

TrialReport::TrialReport()
    : homography_error(std::numeric_limits<double>::quiet_NaN()) {}

namespace {

using geometry::Homography;

Homography estimate_transform(const Image& x, const Image& y,
                              const PipelineConfig& cfg) {
  namespace ft = rwz::features;
  auto pick = [&](const Image& img, std::vector<ft::Keypoint>& kps,
                  std::vector<ft::Descriptor>& desc) {
    const auto raw =
        ft::detect_keypoints(img, cfg.max_keypoints, cfg.detect_threshold);
    const auto dr = ft::describe(img, raw);
    desc = dr.descriptors;
    kps.clear();
    kps.reserve(dr.kept.size());
    for (int i : dr.kept) kps.push_back(raw[static_cast<std::size_t>(i)]);
  };
  std::vector<ft::Keypoint> kx, ky;
  std::vector<ft::Descriptor> dx, dy;
  pick(x, kx, dx);
  pick(y, ky, dy);

  const auto pairs = ft::match(kx, dx, ky, dy, cfg.match_ratio);
  if (static_cast<int>(pairs.size()) < cfg.min_matches)
    throw EstimationError("too few correspondences");

  // RANSAC maps source -> side; the pipeline wants side -> source.
  return geometry::ransac_homography(pairs, cfg.ransac).h.inverse();
}

long allocation_floor(const Mask& m, int channels, int block_size,
                      int min_dim) {
  const int brows = (m.height() + block_size - 1) / block_size;
  const int bcols = (m.width() + block_size - 1) / block_size;
  long occupied = 0;
  for (int by = 0; by < brows; ++by)
    for (int bx = 0; bx < bcols; ++bx) {
      bool any = false;
      const int y1 = std::min((by + 1) * block_size, m.height());
      const int x1 = std::min((bx + 1) * block_size, m.width());
      for (int y = by * block_size; y < y1 && !any; ++y)
        for (int x = bx * block_size; x < x1; ++x)
          if (m.at(y, x)) {
            any = true;
            break;
          }
      if (any) ++occupied;
    }
  return occupied * channels * (min_dim / 2);
}

}  // namespace

TrialReport run_pipeline(const Image& x, const Image& y,
                         const PipelineConfig& cfg,
                         const geometry::Homography* h_true,
                         Image* x_hat_out) {
  if (x.empty() || !x.same_shape(y))
    throw ConfigError("run_pipeline needs two images of identical shape");
  if (cfg.block_size < 1) throw ConfigError("block_size must be positive");
  if (cfg.budget_k < 1) throw ConfigError("budget_k must be positive");
  if (!(cfg.q > 0.0)) throw ConfigError("q must be positive");

  const int H = x.height(), W = x.width(), C = x.channels();

  Homography h_star;
  bool fallback = false;
  bool estimated = false;
  if (!cfg.force_full_mask) {
    try {
      const Homography h0 =
          cfg.fixed_h ? *cfg.fixed_h : estimate_transform(x, y, cfg);
      const auto refined = geometry::refine_homography(x, y, h0, cfg.refine);
      if (refined.final_rmse > cfg.fallback_rmse)
        throw EstimationError("refined alignment residual too high");
      h_star = refined.h;
      estimated = true;
    } catch (const EstimationError&) {
      fallback = true;
      h_star = Homography::identity();
    }
  }

  const Mask m = (cfg.force_full_mask || fallback)
                     ? Mask(H, W, true)
                     : geometry::generate_mask(h_star, H, W);
  const Image x_bar = apply_mask(x, m);

  const long floor_k =
      allocation_floor(m, C, cfg.block_size, cfg.bank.min_dim());
  const long budget = std::max(cfg.budget_k, floor_k);

  const auto payload =
      codec::encode(x_bar, m, cfg.bank, budget, cfg.block_size, cfg.q);

  Image x_tilde(H, W, C, 0.0);
  const long k = payload.symbol_count();
  if (k > 0) {
    const auto tx = channel::normalize_power(payload.symbols, cfg.channel.power);
    auto received = channel::transmit(tx.codeword, cfg.channel);
    for (auto& s : received) s /= tx.scale;
    double noise_var = 0.0;
    if (cfg.channel.snr_db < channel::kNoiselessSnrDb) {
      const double sigma2 =
          channel::snr_to_noise_var(cfg.channel.snr_db, cfg.channel.power);
      noise_var = 0.5 * sigma2 / (tx.scale * tx.scale);
    }
    x_tilde = codec::decode(received, payload, noise_var);
  }

  const Image x_hat = reconstruct::composite(x_tilde, y, h_star, m, cfg.blend);
  if (x_hat_out) *x_hat_out = x_hat;

  TrialReport rep;
  rep.psnr_db = psnr_capped(x, x_hat);
  rep.ms_ssim = ms_ssim(x, x_hat);
  rep.cbr = channel::cbr(k, H, W, C);
  rep.metadata_bytes = codec::metadata_bytes(payload);
  rep.seam = reconstruct::seam_score(x_hat, m);
  rep.snr_db = cfg.channel.snr_db;
  rep.fallback = fallback;
  rep.mask_true_fraction = m.true_fraction();
  rep.symbols = k;
  if (h_true && estimated) {
    const double cx[4] = {0.0, static_cast<double>(W - 1), 0.0,
                          static_cast<double>(W - 1)};
    const double cy[4] = {0.0, 0.0, static_cast<double>(H - 1),
                          static_cast<double>(H - 1)};
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      const auto a = h_star.map(cx[i], cy[i]);
      const auto b = h_true->map(cx[i], cy[i]);
      sum += std::hypot(a[0] - b[0], a[1] - b[1]);
    }
    rep.homography_error = sum / 4.0;
  }
  return rep;
}

}  // namespace rwz::harness
