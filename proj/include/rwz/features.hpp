#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "rwz/image.hpp"

namespace rwz::features {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

/// 256-bit binary descriptor (intensity comparisons on a smoothed patch).
struct Descriptor {
  std::array<std::uint64_t, 4> bits{};

  int hamming(const Descriptor& o) const {
    int d = 0;
    for (int i = 0; i < 4; ++i) d += std::popcount(bits[i] ^ o.bits[i]);
    return d;
  }
};

/// One correspondence: (x1, y1) in the source image, (x2, y2) in the side
/// image, plus the descriptor distance that produced it.
struct MatchPair {
  double x1 = 0.0, y1 = 0.0;
  double x2 = 0.0, y2 = 0.0;
  int distance = 0;
};

/// Margin (pixels) inside which describe() drops keypoints so that every
/// descriptor sampling offset stays within the frame.
inline constexpr int kBorderMargin = 16;

/// Corner detection: Harris response on smoothed gradient products,
/// non-maximum suppression with radius 3, strongest `max_count` returned in
/// descending score order (deterministic tie-break on position). The
/// threshold is an absolute response floor; on unit-range images responses
/// scale with the fourth power of the local gradients, so useful values are
/// tiny (the default keeps quantization-flat regions out while admitting
/// low-contrast texture).
std::vector<Keypoint> detect_keypoints(const Image& img, int max_count = 500,
                                       double threshold = 1e-8);

struct DescribeResult {
  std::vector<Descriptor> descriptors;
  /// descriptors[i] belongs to keypoints[kept[i]] of the input list.
  std::vector<int> kept;
};

/// Binary descriptors from 256 fixed pixel-pair comparisons on a box-smoothed
/// gray patch. The comparison pattern is a compile-time constant, so outputs
/// are reproducible across runs and platforms.
DescribeResult describe(const Image& img, const std::vector<Keypoint>& kps);

struct IndexMatch {
  int a = -1, b = -1;
  int distance = 0;
};

/// Mutual nearest-neighbour matching under Lowe's ratio test (a match is kept
/// only when best < ratio * second_best in both directions).
std::vector<IndexMatch> match_indices(const std::vector<Descriptor>& a,
                                      const std::vector<Descriptor>& b,
                                      double ratio = 0.75);

/// Convenience wrapper producing coordinate pairs for the solver.
std::vector<MatchPair> match(const std::vector<Keypoint>& kps1,
                             const std::vector<Descriptor>& d1,
                             const std::vector<Keypoint>& kps2,
                             const std::vector<Descriptor>& d2,
                             double ratio = 0.75);

/// Debug dump: header x1,y1,x2,y2,distance then one row per pair.
void write_matches_csv(const std::string& path,
                       const std::vector<MatchPair>& pairs);

}  // namespace rwz::features
