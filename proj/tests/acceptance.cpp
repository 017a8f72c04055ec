// End-to-end acceptance checks. Each criterion prints one line:
//   [PASS] criterion N: <what was measured>
//   [FAIL] criterion N: <what was measured>
// Exit status is the number of failed criteria.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "rwz/channel.hpp"
#include "rwz/codec.hpp"
#include "rwz/errors.hpp"
#include "rwz/features.hpp"
#include "rwz/geometry.hpp"
#include "rwz/image.hpp"
#include "rwz/metrics.hpp"
#include "rwz/parallel.hpp"
#include "rwz/pipeline.hpp"
#include "rwz/reconstruct.hpp"
#include "rwz/rng.hpp"
#include "rwz/sweep.hpp"
#include "rwz/synth.hpp"

using namespace rwz;
using geometry::Homography;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

Homography random_transform(rng::Stream& s) {
  return Homography({1.0 + s.next_uniform(-0.15, 0.15),
                     s.next_uniform(-0.15, 0.15), s.next_uniform(-25, 25),
                     s.next_uniform(-0.15, 0.15),
                     1.0 + s.next_uniform(-0.15, 0.15),
                     s.next_uniform(-25, 25), s.next_uniform(-1e-4, 1e-4),
                     s.next_uniform(-1e-4, 1e-4), 1.0});
}

// Random source points with no near-collinear triple (keeps DLT well posed).
std::vector<std::array<double, 2>> spread_points(int n, rng::Stream& s) {
  std::vector<std::array<double, 2>> pts;
  while (static_cast<int>(pts.size()) < n) {
    const std::array<double, 2> p = {s.next_uniform(0, 255),
                                     s.next_uniform(0, 255)};
    bool ok = true;
    for (std::size_t i = 0; i + 1 < pts.size() && ok; ++i)
      for (std::size_t j = i + 1; j < pts.size() && ok; ++j) {
        const double area =
            std::abs((pts[j][0] - pts[i][0]) * (p[1] - pts[i][1]) -
                     (p[0] - pts[i][0]) * (pts[j][1] - pts[i][1]));
        if (area < 100.0) ok = false;
      }
    if (ok) pts.push_back(p);
  }
  return pts;
}

std::vector<features::MatchPair> map_through(
    const Homography& h, const std::vector<std::array<double, 2>>& pts) {
  std::vector<features::MatchPair> pairs;
  for (const auto& p : pts) {
    auto q = geometry::warp_point(h, p[0], p[1]);
    pairs.push_back({p[0], p[1], q[0], q[1], 0});
  }
  return pairs;
}

double corner_error(const Homography& a, const Homography& b, double w,
                    double h) {
  const std::array<std::array<double, 2>, 4> corners = {
      {{0, 0}, {w - 1, 0}, {0, h - 1}, {w - 1, h - 1}}};
  double acc = 0.0;
  for (const auto& c : corners) {
    auto pa = geometry::warp_point(a, c[0], c[1]);
    auto pb = geometry::warp_point(b, c[0], c[1]);
    acc += std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
  }
  return acc / 4.0;
}

harness::SynthPair make_pair(double overlap, std::uint64_t trial_seed,
                             int base_size, double jitter = 0.01) {
  harness::ParallaxSpec spec;
  spec.overlap_target = overlap;
  spec.photometric_jitter = jitter;
  spec.seed = rng::derive(trial_seed, 2);
  Image base =
      harness::textured_base(base_size, base_size, rng::derive(trial_seed, 1));
  return harness::synth_pair(base, spec);
}

// --- criterion 1: noiseless DLT exactness -------------------------------

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    rng::Stream s(rng::derive(0xD17, static_cast<std::uint64_t>(i)));
    const Homography h = random_transform(s);
    const int npts = 4 + static_cast<int>(s.next_below(9));  // 4..12
    const auto pairs = map_through(h, spread_points(npts, s));
    const Homography fit = geometry::dlt_solve(pairs);
    for (int e = 0; e < 9; ++e)
      worst = std::max(worst, std::abs(fit.values()[e] - h.values()[e]));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(1, worst < 1e-8 && secs < 5.0,
         fmt("dlt on 1000 noiseless instances, max entry error %.2e "
             "(< 1e-8), %.2f s (< 5 s)",
             worst, secs));
}

// --- criterion 2: RANSAC under outliers ----------------------------------

void criterion2() {
  int good = 0;
  const int instances = 200;
  for (int i = 0; i < instances; ++i) {
    rng::Stream s(rng::derive(0xA45AC, static_cast<std::uint64_t>(i)));
    const Homography h = random_transform(s);
    std::vector<std::array<double, 2>> pts(70);
    for (auto& p : pts) p = {s.next_uniform(0, 255), s.next_uniform(0, 255)};
    auto pairs = map_through(h, pts);
    for (auto& pr : pairs) {  // 0.5 px inlier noise
      pr.x2 += s.next_uniform(-0.5, 0.5);
      pr.y2 += s.next_uniform(-0.5, 0.5);
    }
    for (int o = 0; o < 30; ++o)  // 30% uniform outliers
      pairs.push_back({s.next_uniform(0, 255), s.next_uniform(0, 255),
                       s.next_uniform(0, 255), s.next_uniform(0, 255), 0});

    geometry::RansacConfig cfg;  // threshold 5.0
    cfg.seed = rng::derive(0x5EED, static_cast<std::uint64_t>(i));
    try {
      const auto res = geometry::ransac_homography(pairs, cfg);
      if (corner_error(res.h, h, 256, 256) < 1.0) ++good;
    } catch (const EstimationError&) {
    }
  }
  report(2, good >= 190,
         fmt("ransac with 30%% outliers: %d/200 instances under 1 px corner "
             "error (need >= 190)",
             good));
}

// --- criterion 3: channel fidelity ---------------------------------------

void criterion3() {
  const int k = 4096, trials = 100;
  double worst_snr_dev = 0.0, worst_power_dev = 0.0;
  for (double snr_db : {-1.0, 1.0, 3.0, 5.0, 7.0, 9.0}) {
    double sig = 0.0, noise = 0.0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t seed =
          rng::derive(0xC4A2, static_cast<std::uint64_t>(t) * 16 +
                                  static_cast<std::uint64_t>(snr_db + 2));
      std::vector<std::complex<double>> raw(k);
      for (int i = 0; i < k; ++i)
        raw[i] = {rng::uniform01(seed, 2 * i) - 0.5,
                  rng::uniform01(seed, 2 * i + 1) - 0.5};
      const auto norm = channel::normalize_power(raw, 1.0);
      double p = 0.0;
      for (const auto& z : norm.codeword.symbols) p += std::norm(z);
      worst_power_dev = std::max(worst_power_dev, std::abs(p / k - 1.0));

      channel::ChannelConfig cfg;
      cfg.snr_db = snr_db;
      cfg.seed = rng::derive(seed, 7);
      const auto rx = channel::transmit(norm.codeword, cfg);
      for (int i = 0; i < k; ++i) {
        sig += std::norm(norm.codeword.symbols[i]);
        noise += std::norm(rx[i] - norm.codeword.symbols[i]);
      }
    }
    const double est = 10.0 * std::log10(sig / noise);
    worst_snr_dev = std::max(worst_snr_dev, std::abs(est - snr_db));
  }
  report(3, worst_snr_dev < 0.3 && worst_power_dev < 1e-9,
         fmt("empirical snr within %.3f dB of target over {-1..9} dB "
             "(< 0.3), power deviation %.1e (< 1e-9)",
             worst_snr_dev, worst_power_dev));
}

// --- criterion 4: codec soundness ----------------------------------------

void criterion4() {
  double worst_rt = 0.0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> blk(64);
    const std::uint64_t seed = rng::derive(0xDC7, i);
    for (int j = 0; j < 64; ++j) blk[j] = rng::uniform01(seed, j) - 0.5;
    const auto back = codec::inverse_transform(codec::forward_transform(blk));
    for (int j = 0; j < 64; ++j)
      worst_rt = std::max(worst_rt, std::abs(back[j] - blk[j]));
  }

  const codec::DimensionBank bank = codec::DimensionBank::default_bank();
  int mmse_wins = 0;
  bool ledger_ok = true;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = rng::derive(0x33E, t);
    std::vector<double> px(16 * 16);
    for (std::size_t i = 0; i < px.size(); ++i)
      px[i] = rng::uniform01(seed, i);
    const Image img(16, 16, 1, std::move(px));
    const auto payload =
        codec::encode(img, Mask(16, 16, true), bank, 256, 8, 0.02);

    long dims = 0;
    for (const auto& a : payload.allocations) dims += a.selected_dim;
    if (2 * payload.symbol_count() != dims) ledger_ok = false;

    const auto norm = channel::normalize_power(payload.symbols, 1.0);
    channel::ChannelConfig ch;
    ch.snr_db = 1.0;
    ch.seed = rng::derive(seed, 3);
    auto rx = channel::transmit(norm.codeword, ch);
    for (auto& z : rx) z /= norm.scale;
    const double nv = channel::snr_to_noise_var(1.0, 1.0) / 2.0 /
                      (norm.scale * norm.scale);

    const Image naive = codec::decode(rx, payload, 0.0);
    const Image mmse = codec::decode(rx, payload, nv);
    double err_naive = 0.0, err_mmse = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
      const double dn = naive.samples()[i] - img.samples()[i];
      const double dm = mmse.samples()[i] - img.samples()[i];
      err_naive += dn * dn;
      err_mmse += dm * dm;
    }
    if (err_mmse <= err_naive) ++mmse_wins;
  }
  report(4, worst_rt < 1e-9 && mmse_wins >= 475 && ledger_ok,
         fmt("dct round trip %.1e (< 1e-9), mmse beats naive in %d/500 "
             "(need >= 475), rate ledger %s",
             worst_rt, mmse_wins, ledger_ok ? "exact" : "VIOLATED"));
}

// --- criterion 5: rate-distortion monotonicity ---------------------------

void criterion5() {
  const auto pair = make_pair(0.7, 0xC5, 192);
  const std::array<double, 5> cbrs = {0.01, 0.02, 0.031, 0.05, 0.07};
  std::array<double, 5> means{};
  for (std::size_t ci = 0; ci < cbrs.size(); ++ci) {
    double acc = 0.0;
    for (int t = 0; t < 20; ++t) {
      harness::PipelineConfig cfg;
      cfg.budget_k =
          std::lround(cbrs[ci] * static_cast<double>(pair.x.size()));
      cfg.channel.snr_db = 3.0;
      cfg.channel.seed = rng::derive(0xC5C5, static_cast<std::uint64_t>(t));
      cfg.fixed_h = pair.h_true;
      cfg.refine.max_iterations = 0;
      acc += harness::run_pipeline(pair.x, pair.y, cfg).psnr_db;
    }
    means[ci] = acc / 20.0;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < means.size(); ++i)
    if (means[i] < means[i - 1]) monotone = false;
  report(5, monotone,
         fmt("mean psnr across cbr {0.01..0.07}: %.2f %.2f %.2f %.2f %.2f dB "
             "(non-decreasing: %s)",
             means[0], means[1], means[2], means[3], means[4],
             monotone ? "yes" : "NO"));
}

// --- criterion 6: side-information gain ----------------------------------

void criterion6() {
  const std::array<double, 3> overlaps = {0.7, 0.4, 0.0};
  std::array<double, 3> gains{};
  for (std::size_t oi = 0; oi < overlaps.size(); ++oi) {
    double acc = 0.0;
    for (int t = 0; t < 20; ++t) {
      const std::uint64_t ts = rng::derive(0xC6, static_cast<std::uint64_t>(t));
      const auto pair = make_pair(overlaps[oi], ts, 192);

      harness::PipelineConfig cfg;
      cfg.budget_k = std::lround(0.031 * static_cast<double>(pair.x.size()));
      cfg.channel.snr_db = 3.0;
      cfg.channel.seed = rng::derive(ts, 3);
      const auto piped = harness::run_pipeline(pair.x, pair.y, cfg);

      harness::PipelineConfig base_cfg = cfg;
      base_cfg.force_full_mask = true;
      base_cfg.channel.seed = rng::derive(ts, 4);
      const auto baseline = harness::run_pipeline(pair.x, pair.y, base_cfg);
      acc += piped.psnr_db - baseline.psnr_db;
    }
    gains[oi] = acc / 20.0;
  }
  const bool ok = gains[0] >= 1.0 && gains[0] >= gains[1] - 0.2 &&
                  gains[1] >= gains[2] - 0.2 && std::abs(gains[2]) <= 0.2;
  report(6, ok,
         fmt("gain over baseline: %.2f dB at overlap 0.7 (>= 1), %.2f at "
             "0.4, %.2f at 0.0 (|.| <= 0.2, non-increasing)",
             gains[0], gains[1], gains[2]));
}

// --- criterion 7: photometric refinement ---------------------------------

void criterion7() {
  std::vector<double> ratios;
  bool never_worse = true;
  int improved_5x = 0;
  const int instances = 100;
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t ts = rng::derive(0xC7, static_cast<std::uint64_t>(i));
    const auto pair = make_pair(0.85, ts, 240, 0.0);
    const double w = pair.y.width(), h = pair.y.height();

    // displace the four true corner images by 0.5 px in random directions
    rng::Stream s(rng::derive(ts, 9));
    std::vector<features::MatchPair> corners;
    for (const auto& c : std::array<std::array<double, 2>, 4>{
             {{0, 0}, {w - 1, 0}, {0, h - 1}, {w - 1, h - 1}}}) {
      auto q = geometry::warp_point(pair.h_true, c[0], c[1]);
      const double ang = s.next_uniform(0, 6.283185307179586);
      corners.push_back(
          {c[0], c[1], q[0] + 0.5 * std::cos(ang), q[1] + 0.5 * std::sin(ang),
           0});
    }
    const Homography h0 = geometry::dlt_solve(corners);
    const double before = corner_error(h0, pair.h_true, w, h);

    geometry::RefineConfig cfg;
    const auto res = geometry::refine_homography(pair.x, pair.y, h0, cfg);
    const double after = corner_error(res.h, pair.h_true, w, h);
    if (res.final_rmse > res.initial_rmse) never_worse = false;
    if (after * 5.0 <= before) ++improved_5x;
    ratios.push_back(after > 0.0 ? before / after : 1e9);
  }
  std::nth_element(ratios.begin(), ratios.begin() + instances / 2,
                   ratios.end());
  const double median_ratio = ratios[instances / 2];
  report(7, median_ratio >= 5.0 && never_worse,
         fmt("median corner-error reduction %.1fx over 100 pairs (>= 5x), "
             "5x improved in %d, photometric error increased: %s",
             median_ratio, improved_5x, never_worse ? "never" : "YES"));
}

// --- criterion 8: seam quality -------------------------------------------

void criterion8() {
  int feather_better = 0;
  double worst_poisson_delta = -1e9;
  const int instances = 50;
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t ts = rng::derive(0xC8, static_cast<std::uint64_t>(i));
    const auto pair = make_pair(0.7, ts, 192);

    harness::PipelineConfig cfg;
    cfg.budget_k = std::lround(0.031 * static_cast<double>(pair.x.size()));
    cfg.channel.snr_db = 3.0;
    cfg.channel.seed = rng::derive(ts, 3);
    cfg.fixed_h = pair.h_true;
    cfg.refine.max_iterations = 0;

    harness::PipelineConfig hard = cfg;
    hard.blend.feather_width = 0;
    harness::PipelineConfig soft = cfg;
    soft.blend.feather_width = 4;
    harness::PipelineConfig smoothed = soft;
    smoothed.blend.poisson = true;
    smoothed.blend.poisson_iterations = 100;

    const double seam_hard = harness::run_pipeline(pair.x, pair.y, hard).seam;
    const double seam_soft = harness::run_pipeline(pair.x, pair.y, soft).seam;
    const double seam_poisson =
        harness::run_pipeline(pair.x, pair.y, smoothed).seam;
    if (seam_soft < seam_hard) ++feather_better;
    worst_poisson_delta =
        std::max(worst_poisson_delta, seam_poisson - seam_soft);
  }
  report(8, feather_better == instances && worst_poisson_delta <= 1e-6,
         fmt("feather 4 beats feather 0 in %d/50 seams (need 50), worst "
             "poisson delta %.2e (<= 1e-6)",
             feather_better, worst_poisson_delta));
}

// --- criterion 9: sweep determinism --------------------------------------

void criterion9() {
  harness::SweepConfig cfg;
  cfg.axis = harness::SweepAxis::Snr;
  cfg.values = {1.0, 5.0};
  cfg.trials = 2;
  cfg.seed = 99;
  cfg.base_height = 144;
  cfg.base_width = 144;
  cfg.pipeline.budget_k = std::lround(0.031 * 96 * 96 * 3);

  const int saved = par::max_threads();
  par::set_max_threads(1);
  const std::string a1 = harness::sweep(cfg);
  const std::string a2 = harness::sweep(cfg);
  par::set_max_threads(4);
  const std::string b1 = harness::sweep(cfg);
  const std::string b2 = harness::sweep(cfg);
  par::set_max_threads(saved);

  const bool ok = a1 == a2 && a1 == b1 && b1 == b2 && !a1.empty();
  report(9, ok,
         fmt("sweep csv across repeats and 1 vs 4 threads: %s (%zu bytes)",
             ok ? "byte-identical" : "DIFFERS", a1.size()));
}

// --- criterion 10: fallback path -----------------------------------------

void criterion10() {
  int completed = 0, fallbacks = 0;
  const int trials = 5;
  for (int t = 0; t < trials; ++t) {
    const Image x(96, 96, 3, 0.5);  // zero texture: no detectable features
    const Image y = harness::textured_base(96, 96, 400 + t);
    harness::PipelineConfig cfg;
    cfg.budget_k = std::lround(0.031 * static_cast<double>(x.size()));
    cfg.channel.snr_db = 3.0;
    cfg.channel.seed = rng::derive(0xCA, static_cast<std::uint64_t>(t));
    try {
      const auto rep = harness::run_pipeline(x, y, cfg);
      ++completed;
      if (rep.fallback && rep.mask_true_fraction == 1.0) ++fallbacks;
    } catch (const std::exception&) {
    }
  }
  const double rate =
      static_cast<double>(fallbacks) / static_cast<double>(trials);
  report(10, completed == trials && rate == 1.0,
         fmt("zero-texture pairs: %d/%d completed, fallback_rate %.1f "
             "(need 1.0)",
             completed, trials, rate));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
