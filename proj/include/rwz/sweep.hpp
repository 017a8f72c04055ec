#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rwz/pipeline.hpp"
#include "rwz/synth.hpp"

namespace rwz::harness {

enum class SweepAxis { Snr, Cbr, Overlap };

SweepAxis axis_from_name(const std::string& name);
std::string axis_name(SweepAxis axis);

struct SweepConfig {
  SweepAxis axis = SweepAxis::Snr;
  std::vector<double> values;
  int trials = 5;
  std::uint64_t seed = 0;
  /// Dims of the generated base texture; each trial's pair is its 2/3 crop.
  int base_height = 384;
  int base_width = 384;
  ParallaxSpec parallax;    // overlap axis overrides overlap_target
  PipelineConfig pipeline;  // snr / cbr axes override snr_db / budget_k
};

/// Monte-Carlo sweep along one axis. Each trial draws its own base texture
/// and view geometry from a per-trial seed that is shared across axis values
/// (paired comparisons), runs the full pipeline plus the all-true-mask
/// baseline under the same budget policy, and aggregates one CSV row per
/// axis value. Returns the full CSV text (header + rows); deterministic for
/// a fixed config, independent of thread count.
std::string sweep(const SweepConfig& cfg);

/// The fixed CSV header line (no trailing newline).
std::string sweep_csv_header();

}  // namespace rwz::harness
