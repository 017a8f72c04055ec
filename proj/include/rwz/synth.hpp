#pragma once

#include <cstdint>

#include "rwz/geometry.hpp"
#include "rwz/image.hpp"

namespace rwz::harness {

// Deterministic textured test image: blurred noise with a mild contrast
// stretch, three channels sharing a luma base.
Image textured_base(int height, int width, std::uint64_t seed);

struct ParallaxSpec {
  double overlap_target = 0.7;       // fraction of the source covered by the side view
  double rotation_deg = 1.0;
  double perspective_strength = 0.02;
  double photometric_jitter = 0.01;  // uniform per-pixel jitter on the side image
  std::uint64_t seed = 1;
};

struct SynthPair {
  Image x;                       // source frame (central crop of the base)
  Image y;                       // side frame rendered through h_true
  geometry::Homography h_true;   // maps side coordinates into the source frame
};

// Carves a source frame out of `base` and renders a side view whose
// uncovered fraction matches 1 - overlap_target (within 0.05, else throws).
SynthPair synth_pair(const Image& base, const ParallaxSpec& spec);

}  // namespace rwz::harness
