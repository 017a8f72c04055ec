#include "rwz/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <vector>

#include "rwz/errors.hpp"
#include "rwz/parallel.hpp"
#include "rwz/rng.hpp"

namespace rwz::harness {

SweepAxis axis_from_name(const std::string& name) {
  if (name == "snr") return SweepAxis::Snr;
  if (name == "cbr") return SweepAxis::Cbr;
  if (name == "overlap") return SweepAxis::Overlap;
  throw ConfigError("unknown sweep axis: " + name);
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Snr: return "snr";
    case SweepAxis::Cbr: return "cbr";
    default: return "overlap";
  }
}

std::string sweep_csv_header() {
  return "axis,value,psnr_mean,psnr_std,msssim_mean,msssim_std,cbr,"
         "metadata_bytes,seam_mean,homog_err_mean,fallback_rate,"
         "psnr_baseline_mean";
}

namespace {

struct Cell {
  TrialReport main;
  TrialReport base;
};

Cell run_cell(const SweepConfig& cfg, double value, int trial) {
  const std::uint64_t ts = rng::derive(cfg.seed, static_cast<unsigned>(trial));

  const Image base_img =
      textured_base(cfg.base_height, cfg.base_width, rng::derive(ts, 1));
  ParallaxSpec ps = cfg.parallax;
  ps.seed = rng::derive(ts, 2);
  if (cfg.axis == SweepAxis::Overlap) ps.overlap_target = value;
  const SynthPair pair = synth_pair(base_img, ps);

  PipelineConfig pc = cfg.pipeline;
  if (cfg.axis == SweepAxis::Snr) pc.channel.snr_db = value;
  if (cfg.axis == SweepAxis::Cbr)
    pc.budget_k = std::max(
        1L, std::lround(value * static_cast<double>(pair.x.size())));
  pc.channel.seed = rng::derive(ts, 3);

  Cell cell;
  cell.main = run_pipeline(pair.x, pair.y, pc, &pair.h_true);

  PipelineConfig bc = pc;
  bc.force_full_mask = true;
  bc.channel.seed = rng::derive(ts, 4);
  cell.base = run_pipeline(pair.x, pair.y, bc);
  return cell;
}

struct Stat {
  double mean = 0.0, stddev = 0.0;
};

Stat stat_of(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

std::string sweep(const SweepConfig& cfg) {
  if (cfg.values.empty()) throw ConfigError("sweep needs at least one value");
  if (cfg.trials < 1) throw ConfigError("trials must be positive");

  const int nv = static_cast<int>(cfg.values.size());
  const int nt = cfg.trials;
  std::vector<Cell> cells(static_cast<std::size_t>(nv) * nt);
  std::vector<std::exception_ptr> errors(cells.size());
  par::for_index(static_cast<std::ptrdiff_t>(cells.size()),
                 [&](std::ptrdiff_t i) {
                   const int vi = static_cast<int>(i) / nt;
                   const int t = static_cast<int>(i) % nt;
                   try {
                     cells[i] = run_cell(cfg, cfg.values[vi], t);
                   } catch (...) {
                     errors[i] = std::current_exception();
                   }
                 });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::string out = sweep_csv_header() + "\n";
  const std::string axis = axis_name(cfg.axis);
  char buf[512];
  for (int vi = 0; vi < nv; ++vi) {
    std::vector<double> psnr, ssim, cbr, meta, seam, herr, bpsnr;
    int fallbacks = 0;
    for (int t = 0; t < nt; ++t) {
      const Cell& c = cells[static_cast<std::size_t>(vi) * nt + t];
      psnr.push_back(c.main.psnr_db);
      ssim.push_back(c.main.ms_ssim);
      cbr.push_back(c.main.cbr);
      meta.push_back(static_cast<double>(c.main.metadata_bytes));
      seam.push_back(c.main.seam);
      if (!std::isnan(c.main.homography_error))
        herr.push_back(c.main.homography_error);
      if (c.main.fallback) ++fallbacks;
      bpsnr.push_back(c.base.psnr_db);
    }
    const Stat sp = stat_of(psnr), ss = stat_of(ssim);
    // -1 marks rows where every trial fell back (no estimate to score).
    const double herr_mean = herr.empty() ? -1.0 : stat_of(herr).mean;
    std::snprintf(buf, sizeof(buf),
                  "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  axis.c_str(), cfg.values[vi], sp.mean, sp.stddev, ss.mean,
                  ss.stddev, stat_of(cbr).mean, stat_of(meta).mean,
                  stat_of(seam).mean, herr_mean,
                  static_cast<double>(fallbacks) / nt, stat_of(bpsnr).mean);
    out += buf;
  }
  return out;
}

}  // namespace rwz::harness
