// rwzc: command-line front end for the side-information image-transmission
// simulator. Subcommands cover homography estimation, mask generation,
// synthetic pair creation, single end-to-end transmissions, and Monte-Carlo
// sweeps that emit CSV.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rwz/channel.hpp"
#include "rwz/errors.hpp"
#include "rwz/features.hpp"
#include "rwz/geometry.hpp"
#include "rwz/image.hpp"
#include "rwz/parallel.hpp"
#include "rwz/pipeline.hpp"
#include "rwz/rng.hpp"
#include "rwz/sweep.hpp"
#include "rwz/synth.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok =
        csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size())
        throw rwz::ConfigError("bad value in --values: " + tok);
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw rwz::ConfigError("--values is empty");
  return out;
}

void print_kv(const char* key, double v) { std::printf("%s=%.6f\n", key, v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"image transmission simulator with decoder-side side information"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a key=value file");

  app.add_option("--threads",
                 [](const std::vector<std::string>& v) {
                   rwz::par::set_max_threads(std::stoi(v.back()));
                   return true;
                 },
                 "cap worker threads (overrides RWZC_THREADS)");

  // --- estimate ---------------------------------------------------------
  auto* est = app.add_subcommand(
      "estimate", "estimate the side-to-source homography from two images");
  struct {
    std::string x, y, out = "h.txt", matches;
    int max_keypoints = 500;
    double threshold = 1e-8, ratio = 0.75, inlier_px = 5.0;
    int iters = 2000;
    std::uint64_t seed = 0;
  } eo;
  est->add_option("x", eo.x, "source image (the one to be transmitted)")
      ->required()->check(CLI::ExistingFile);
  est->add_option("y", eo.y, "side image (already at the receiver)")
      ->required()->check(CLI::ExistingFile);
  est->add_option("--out", eo.out, "output homography file");
  est->add_option("--dump-matches", eo.matches, "also write the match CSV");
  est->add_option("--max-keypoints", eo.max_keypoints, "detector cap");
  est->add_option("--threshold", eo.threshold, "detector response threshold");
  est->add_option("--ratio", eo.ratio, "match ratio-test value");
  est->add_option("--inlier-px", eo.inlier_px, "RANSAC inlier threshold, px");
  est->add_option("--iters", eo.iters, "RANSAC iterations");
  est->add_option("--seed", eo.seed, "RANSAC seed");
  est->callback([&] {
    namespace ft = rwz::features;
    const rwz::Image x = rwz::load_image(eo.x);
    const rwz::Image y = rwz::load_image(eo.y);
    auto pick = [&](const rwz::Image& img, std::vector<ft::Keypoint>& kps,
                    std::vector<ft::Descriptor>& desc) {
      const auto raw = ft::detect_keypoints(img, eo.max_keypoints, eo.threshold);
      const auto dr = ft::describe(img, raw);
      desc = dr.descriptors;
      for (int i : dr.kept) kps.push_back(raw[static_cast<std::size_t>(i)]);
    };
    std::vector<ft::Keypoint> kx, ky;
    std::vector<ft::Descriptor> dx, dy;
    pick(x, kx, dx);
    pick(y, ky, dy);
    const auto pairs = ft::match(kx, dx, ky, dy, eo.ratio);
    if (!eo.matches.empty()) ft::write_matches_csv(eo.matches, pairs);
    std::printf("matches=%zu\n", pairs.size());

    rwz::geometry::RansacConfig rc;
    rc.max_iterations = eo.iters;
    rc.inlier_threshold = eo.inlier_px;
    rc.seed = eo.seed;
    const auto rr = rwz::geometry::ransac_homography(pairs, rc);
    std::printf("inliers=%zu\n", rr.inlier_indices.size());

    const auto refined =
        rwz::geometry::refine_homography(x, y, rr.h.inverse(), {});
    print_kv("initial_rmse", refined.initial_rmse);
    print_kv("final_rmse", refined.final_rmse);
    std::printf("iterations=%d\n", refined.iterations);
    rwz::geometry::save_homography(eo.out, refined.h);
    std::printf("wrote %s\n", eo.out.c_str());
  });

  // --- mask -------------------------------------------------------------
  auto* msk = app.add_subcommand(
      "mask", "render the transmit mask implied by a homography file");
  struct {
    std::string h, out = "mask.png";
    int height = 0, width = 0;
  } mo;
  msk->add_option("homography", mo.h, "homography file (side -> source)")
      ->required()->check(CLI::ExistingFile);
  msk->add_option("H", mo.height, "mask height")->required();
  msk->add_option("W", mo.width, "mask width")->required();
  msk->add_option("--out", mo.out, "output raster (white = transmit)");
  msk->callback([&] {
    if (mo.height < 1 || mo.width < 1)
      throw rwz::ConfigError("mask dims must be positive");
    const auto h = rwz::geometry::load_homography(mo.h);
    const rwz::Mask m = rwz::geometry::generate_mask(h, mo.height, mo.width);
    rwz::save_image(m.to_raster(), mo.out);
    print_kv("true_fraction", m.true_fraction());
    std::printf("wrote %s\n", mo.out.c_str());
  });

  // --- synth ------------------------------------------------------------
  auto* syn = app.add_subcommand(
      "synth", "generate a correlated image pair with known geometry");
  struct {
    std::string base, outdir = ".";
    double overlap = 0.7, rotation = 1.0, perspective = 0.02, jitter = 0.01;
    std::uint64_t seed = 1;
    int size = 384;
  } so;
  syn->add_option("base", so.base, "base texture image (generated if omitted)")
      ->check(CLI::ExistingFile);
  syn->add_option("--overlap", so.overlap, "target covered fraction [0,1]");
  syn->add_option("--seed", so.seed, "generator seed");
  syn->add_option("--rotation", so.rotation, "view rotation, degrees");
  syn->add_option("--perspective", so.perspective, "perspective strength");
  syn->add_option("--jitter", so.jitter, "photometric jitter amplitude");
  syn->add_option("--size", so.size, "generated base size (square)");
  syn->add_option("--outdir", so.outdir, "output directory");
  syn->callback([&] {
    const rwz::Image base =
        so.base.empty()
            ? rwz::harness::textured_base(so.size, so.size,
                                          rwz::rng::derive(so.seed, 0xBA5E))
            : rwz::load_image(so.base);
    rwz::harness::ParallaxSpec spec;
    spec.overlap_target = so.overlap;
    spec.rotation_deg = so.rotation;
    spec.perspective_strength = so.perspective;
    spec.photometric_jitter = so.jitter;
    spec.seed = so.seed;
    const auto pair = rwz::harness::synth_pair(base, spec);
    rwz::save_image(pair.x, so.outdir + "/x.png");
    rwz::save_image(pair.y, so.outdir + "/y.png");
    rwz::geometry::save_homography(so.outdir + "/h_true.txt", pair.h_true);
    const auto m = rwz::geometry::generate_mask(pair.h_true, pair.x.height(),
                                                pair.x.width());
    print_kv("overlap_achieved", 1.0 - m.true_fraction());
    std::printf("wrote %s/x.png %s/y.png %s/h_true.txt\n", so.outdir.c_str(),
                so.outdir.c_str(), so.outdir.c_str());
  });

  // --- pipeline ---------------------------------------------------------
  auto* pip = app.add_subcommand(
      "pipeline", "run one end-to-end transmission and print the report");
  pip->set_help_flag("--help", "print this help message and exit");
  struct {
    std::string x, y, h, h_true, out;
    double snr = 3.0, cbr = 0.031, q = 0.02, feather = 4.0;
    bool poisson = false, full_mask = false;
    std::uint64_t seed = 0;
    int block = 8;
  } po;
  pip->add_option("x", po.x, "source image")->required()->check(CLI::ExistingFile);
  pip->add_option("y", po.y, "side image")->required()->check(CLI::ExistingFile);
  pip->add_option("--snr", po.snr, "channel SNR in dB");
  pip->add_option("--cbr", po.cbr, "target channel bandwidth ratio");
  pip->add_option("--h", po.h, "use this homography file instead of estimating")
      ->check(CLI::ExistingFile);
  pip->add_option("--h-true", po.h_true, "ground-truth homography for scoring")
      ->check(CLI::ExistingFile);
  pip->add_flag("--poisson", po.poisson, "enable gradient-domain seam cleanup");
  pip->add_flag("--full-mask", po.full_mask, "baseline: transmit every pixel");
  pip->add_option("--feather", po.feather, "seam feather half-width, px");
  pip->add_option("--seed", po.seed, "channel noise seed");
  pip->add_option("--block", po.block, "transform block size");
  pip->add_option("--q", po.q, "entropy-model scale");
  pip->add_option("--out", po.out, "save the reconstruction to this image");
  pip->callback([&] {
    const rwz::Image x = rwz::load_image(po.x);
    const rwz::Image y = rwz::load_image(po.y);
    rwz::harness::PipelineConfig cfg;
    cfg.channel.snr_db = po.snr;
    cfg.channel.seed = po.seed;
    cfg.budget_k = std::max(
        1L, std::lround(po.cbr * static_cast<double>(x.size())));
    cfg.block_size = po.block;
    cfg.q = po.q;
    cfg.blend.poisson = po.poisson;
    cfg.blend.feather_width = static_cast<int>(po.feather);
    cfg.force_full_mask = po.full_mask;
    if (!po.h.empty()) cfg.fixed_h = rwz::geometry::load_homography(po.h);
    rwz::geometry::Homography ht;
    const bool have_truth = !po.h_true.empty();
    if (have_truth) ht = rwz::geometry::load_homography(po.h_true);

    rwz::Image x_hat;
    const auto rep = rwz::harness::run_pipeline(
        x, y, cfg, have_truth ? &ht : nullptr, po.out.empty() ? nullptr : &x_hat);
    print_kv("psnr_db", rep.psnr_db);
    print_kv("ms_ssim", rep.ms_ssim);
    print_kv("cbr", rep.cbr);
    std::printf("metadata_bytes=%zu\n", rep.metadata_bytes);
    print_kv("seam", rep.seam);
    print_kv("snr_db", rep.snr_db);
    print_kv("homography_error", rep.homography_error);
    std::printf("fallback=%d\n", rep.fallback ? 1 : 0);
    print_kv("mask_true_fraction", rep.mask_true_fraction);
    std::printf("symbols=%ld\n", rep.symbols);
    if (!po.out.empty()) {
      rwz::save_image(x_hat, po.out);
      std::printf("wrote %s\n", po.out.c_str());
    }
  });

  // --- sweep ------------------------------------------------------------
  auto* swp = app.add_subcommand(
      "sweep", "Monte-Carlo sweep along snr, cbr, or overlap; writes CSV");
  struct {
    std::string axis = "snr", values = "-1,1,3,5,7,9", out = "results.csv";
    int trials = 5, base_size = 384;
    std::uint64_t seed = 0;
    double snr = 3.0, cbr = 0.031, overlap = 0.7;
    bool poisson = false;
    bool echo = false;
  } wo;
  swp->add_option("--axis", wo.axis, "snr | cbr | overlap");
  swp->add_option("--values", wo.values, "comma-separated axis values");
  swp->add_option("--trials", wo.trials, "trials per axis value");
  swp->add_option("--seed", wo.seed, "sweep master seed");
  swp->add_option("--out", wo.out, "output CSV path");
  swp->add_option("--snr", wo.snr, "fixed SNR when not the axis");
  swp->add_option("--cbr", wo.cbr, "fixed target CBR when not the axis");
  swp->add_option("--overlap", wo.overlap, "fixed overlap when not the axis");
  swp->add_option("--base-size", wo.base_size, "generated base size (square)");
  swp->add_flag("--poisson", wo.poisson, "enable gradient-domain seam cleanup");
  swp->add_flag("--echo", wo.echo, "also print the CSV to stdout");
  swp->callback([&] {
    rwz::harness::SweepConfig cfg;
    cfg.axis = rwz::harness::axis_from_name(wo.axis);
    cfg.values = parse_values(wo.values);
    cfg.trials = wo.trials;
    cfg.seed = wo.seed;
    cfg.base_height = cfg.base_width = wo.base_size;
    cfg.parallax.overlap_target = wo.overlap;
    cfg.pipeline.channel.snr_db = wo.snr;
    cfg.pipeline.blend.poisson = wo.poisson;
    // The target CBR is resolved against the crop dims of the generated base.
    const int crop_h = wo.base_size * 2 / 3, crop_w = wo.base_size * 2 / 3;
    cfg.pipeline.budget_k = std::max(
        1L, std::lround(wo.cbr * 3.0 * crop_h * crop_w));
    const std::string csv = rwz::harness::sweep(cfg);
    std::FILE* f = std::fopen(wo.out.c_str(), "wb");
    if (!f) throw rwz::IoError("cannot open " + wo.out + " for writing");
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
    if (wo.echo) std::fputs(csv.c_str(), stdout);
    std::printf("wrote %s (%zu rows)\n", wo.out.c_str(), cfg.values.size());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
