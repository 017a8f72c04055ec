#include "rwz/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "rwz/errors.hpp"
#include "rwz/parallel.hpp"
#include "rwz/rng.hpp"

namespace rwz::features {

namespace {

constexpr double kHarrisK = 0.04;
constexpr int kNmsRadius = 3;
constexpr double kSmoothSigma = 1.5;
constexpr int kPatchReach = 12;  // descriptor offsets lie in [-12, 12]
constexpr int kBoxRadius = 3;    // 7x7 pre-smoothing for descriptors

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Separable Gaussian blur with border clamping.
std::vector<double> gauss_blur(const std::vector<double>& in, int h, int w) {
  std::array<double, 7> kern;
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double d = i - 3;
    kern[i] = std::exp(-d * d / (2.0 * kSmoothSigma * kSmoothSigma));
    sum += kern[i];
  }
  for (double& k : kern) k /= sum;

  std::vector<double> tmp(in.size()), out(in.size());
  par::for_index(h, [&](std::ptrdiff_t y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -3; i <= 3; ++i)
        acc += kern[i + 3] * in[y * w + clampi(x + i, 0, w - 1)];
      tmp[y * w + x] = acc;
    }
  });
  par::for_index(h, [&](std::ptrdiff_t y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -3; i <= 3; ++i)
        acc += kern[i + 3] * tmp[clampi(static_cast<int>(y) + i, 0, h - 1) * w + x];
      out[y * w + x] = acc;
    }
  });
  return out;
}

std::vector<double> harris_response(const Image& gray) {
  const int h = gray.height(), w = gray.width();
  const auto& g = gray.samples();
  std::vector<double> ixx(g.size()), iyy(g.size()), ixy(g.size());
  par::for_index(h, [&](std::ptrdiff_t y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (g[y * w + clampi(x + 1, 0, w - 1)] -
                               g[y * w + clampi(x - 1, 0, w - 1)]);
      const double gy =
          0.5 * (g[clampi(static_cast<int>(y) + 1, 0, h - 1) * w + x] -
                 g[clampi(static_cast<int>(y) - 1, 0, h - 1) * w + x]);
      ixx[y * w + x] = gx * gx;
      iyy[y * w + x] = gy * gy;
      ixy[y * w + x] = gx * gy;
    }
  });
  ixx = gauss_blur(ixx, h, w);
  iyy = gauss_blur(iyy, h, w);
  ixy = gauss_blur(ixy, h, w);

  std::vector<double> resp(g.size());
  par::for_index(h, [&](std::ptrdiff_t y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      const double det = ixx[i] * iyy[i] - ixy[i] * ixy[i];
      const double tr = ixx[i] + iyy[i];
      resp[i] = det - kHarrisK * tr * tr;
    }
  });
  return resp;
}

struct PatternEntry {
  int x1, y1, x2, y2;
};

// Fixed comparison pattern; 256 offset pairs drawn once from a constant seed.
const std::array<PatternEntry, 256>& pattern() {
  static const std::array<PatternEntry, 256> table = [] {
    std::array<PatternEntry, 256> t{};
    rng::Stream s(0x5EEDBA5EULL);
    for (auto& e : t) {
      e.x1 = static_cast<int>(s.next_below(2 * kPatchReach + 1)) - kPatchReach;
      e.y1 = static_cast<int>(s.next_below(2 * kPatchReach + 1)) - kPatchReach;
      e.x2 = static_cast<int>(s.next_below(2 * kPatchReach + 1)) - kPatchReach;
      e.y2 = static_cast<int>(s.next_below(2 * kPatchReach + 1)) - kPatchReach;
    }
    return t;
  }();
  return table;
}

// Mean over the (2r+1)^2 box centred at (y, x); caller keeps it in-frame.
class BoxMean {
 public:
  BoxMean(const std::vector<double>& img, int h, int w) : h_(h), w_(w) {
    integral_.assign(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
    for (int y = 0; y < h; ++y) {
      double rowsum = 0.0;
      for (int x = 0; x < w; ++x) {
        rowsum += img[static_cast<std::size_t>(y) * w + x];
        integral_[idx(y + 1, x + 1)] = integral_[idx(y, x + 1)] + rowsum;
      }
    }
  }

  double at(int y, int x, int r) const {
    const int y0 = y - r, y1 = y + r + 1, x0 = x - r, x1 = x + r + 1;
    const double s = integral_[idx(y1, x1)] - integral_[idx(y0, x1)] -
                     integral_[idx(y1, x0)] + integral_[idx(y0, x0)];
    return s / ((2 * r + 1) * (2 * r + 1));
  }

 private:
  std::size_t idx(int y, int x) const {
    return static_cast<std::size_t>(y) * (w_ + 1) + x;
  }
  int h_, w_;
  std::vector<double> integral_;
};

}  // namespace

std::vector<Keypoint> detect_keypoints(const Image& img, int max_count,
                                       double threshold) {
  if (img.empty()) return {};
  if (max_count <= 0) throw ConfigError("max_count must be positive");
  const Image gray = img.to_gray();
  const int h = gray.height(), w = gray.width();
  const auto resp = harris_response(gray);

  std::vector<Keypoint> kps;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r = resp[static_cast<std::size_t>(y) * w + x];
      if (r <= threshold) continue;
      bool is_max = true;
      for (int dy = -kNmsRadius; dy <= kNmsRadius && is_max; ++dy) {
        for (int dx = -kNmsRadius; dx <= kNmsRadius; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          const double rn = resp[static_cast<std::size_t>(ny) * w + nx];
          // Equal responses resolve to the earlier pixel in raster order.
          if (rn > r || (rn == r && (ny < y || (ny == y && nx < x)))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max)
        kps.push_back({static_cast<double>(x), static_cast<double>(y), r});
    }
  }

  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (static_cast<int>(kps.size()) > max_count) kps.resize(max_count);
  return kps;
}

DescribeResult describe(const Image& img, const std::vector<Keypoint>& kps) {
  DescribeResult out;
  if (img.empty() || kps.empty()) return out;
  const Image gray = img.to_gray();
  const int h = gray.height(), w = gray.width();
  const BoxMean box(gray.samples(), h, w);
  const auto& pat = pattern();

  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(kps.size()); ++i) {
    const int cx = static_cast<int>(std::lround(kps[i].x));
    const int cy = static_cast<int>(std::lround(kps[i].y));
    if (cx >= kBorderMargin && cx < w - kBorderMargin && cy >= kBorderMargin &&
        cy < h - kBorderMargin)
      keep.push_back(i);
  }

  out.kept = keep;
  out.descriptors.resize(keep.size());
  par::for_index(static_cast<std::ptrdiff_t>(keep.size()),
                 [&](std::ptrdiff_t k) {
                   const Keypoint& kp = kps[keep[k]];
                   const int cx = static_cast<int>(std::lround(kp.x));
                   const int cy = static_cast<int>(std::lround(kp.y));
                   Descriptor d{};
                   for (int b = 0; b < 256; ++b) {
                     const auto& e = pat[b];
                     const double v1 = box.at(cy + e.y1, cx + e.x1, kBoxRadius);
                     const double v2 = box.at(cy + e.y2, cx + e.x2, kBoxRadius);
                     if (v1 < v2)
                       d.bits[b >> 6] |= std::uint64_t{1} << (b & 63);
                   }
                   out.descriptors[k] = d;
                 });
  return out;
}

std::vector<IndexMatch> match_indices(const std::vector<Descriptor>& a,
                                      const std::vector<Descriptor>& b,
                                      double ratio) {
  std::vector<IndexMatch> out;
  if (a.empty() || b.empty()) return out;

  struct Best {
    int idx = -1;
    int d1 = 1 << 30;
    int d2 = 1 << 30;
  };
  std::vector<Best> fwd(a.size()), rev(b.size());

  par::for_index(static_cast<std::ptrdiff_t>(a.size()), [&](std::ptrdiff_t i) {
    Best best;
    for (int j = 0; j < static_cast<int>(b.size()); ++j) {
      const int d = a[i].hamming(b[j]);
      if (d < best.d1) {
        best.d2 = best.d1;
        best.d1 = d;
        best.idx = j;
      } else if (d < best.d2) {
        best.d2 = d;
      }
    }
    fwd[i] = best;
  });
  par::for_index(static_cast<std::ptrdiff_t>(b.size()), [&](std::ptrdiff_t j) {
    Best best;
    for (int i = 0; i < static_cast<int>(a.size()); ++i) {
      const int d = b[j].hamming(a[i]);
      if (d < best.d1) {
        best.d2 = best.d1;
        best.d1 = d;
        best.idx = i;
      } else if (d < best.d2) {
        best.d2 = d;
      }
    }
    rev[j] = best;
  });

  for (int i = 0; i < static_cast<int>(a.size()); ++i) {
    const Best& f = fwd[i];
    if (f.idx < 0) continue;
    const Best& r = rev[f.idx];
    if (r.idx != i) continue;  // not mutual
    if (f.d1 >= ratio * f.d2 || r.d1 >= ratio * r.d2) continue;
    out.push_back({i, f.idx, f.d1});
  }
  return out;
}

std::vector<MatchPair> match(const std::vector<Keypoint>& kps1,
                             const std::vector<Descriptor>& d1,
                             const std::vector<Keypoint>& kps2,
                             const std::vector<Descriptor>& d2, double ratio) {
  if (kps1.size() != d1.size() || kps2.size() != d2.size())
    throw ConfigError("keypoint and descriptor lists must align");
  std::vector<MatchPair> out;
  for (const auto& m : match_indices(d1, d2, ratio))
    out.push_back({kps1[m.a].x, kps1[m.a].y, kps2[m.b].x, kps2[m.b].y,
                   m.distance});
  return out;
}

void write_matches_csv(const std::string& path,
                       const std::vector<MatchPair>& pairs) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path + " for writing");
  std::fprintf(f, "x1,y1,x2,y2,distance\n");
  for (const auto& p : pairs)
    std::fprintf(f, "%.6f,%.6f,%.6f,%.6f,%d\n", p.x1, p.y1, p.x2, p.y2,
                 p.distance);
  std::fclose(f);
}

}  // namespace rwz::features
