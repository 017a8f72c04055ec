#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rwz/geometry.hpp"
#include "rwz/rng.hpp"
#include "rwz/synth.hpp"

using namespace rwz;
using geometry::Homography;

namespace {

double corner_error(const Homography& h, const Homography& h_ref, int w,
                    int h_px) {
  const std::array<std::array<double, 2>, 4> corners = {
      {{0, 0}, {double(w - 1), 0}, {0, double(h_px - 1)},
       {double(w - 1), double(h_px - 1)}}};
  double acc = 0.0;
  for (const auto& c : corners) {
    auto a = geometry::warp_point(h, c[0], c[1]);
    auto b = geometry::warp_point(h_ref, c[0], c[1]);
    acc += std::hypot(a[0] - b[0], a[1] - b[1]);
  }
  return acc / 4.0;
}

Homography perturb_corners(const Homography& h, int w, int h_px,
                           double magnitude, std::uint64_t seed) {
  rng::Stream s(seed);
  std::vector<features::MatchPair> pairs;
  const std::array<std::array<double, 2>, 4> corners = {
      {{0, 0}, {double(w - 1), 0}, {0, double(h_px - 1)},
       {double(w - 1), double(h_px - 1)}}};
  for (const auto& c : corners) {
    auto q = geometry::warp_point(h, c[0], c[1]);
    const double ang = s.next_uniform(0, 2 * 3.14159265358979);
    pairs.push_back({c[0], c[1], q[0] + magnitude * std::cos(ang),
                     q[1] + magnitude * std::sin(ang), 0});
  }
  return geometry::dlt_solve(pairs);
}

harness::SynthPair make_pair(std::uint64_t seed) {
  harness::ParallaxSpec spec;
  spec.overlap_target = 0.85;
  spec.rotation_deg = 1.0;
  spec.perspective_strength = 0.01;
  spec.photometric_jitter = 0.0;
  spec.seed = rng::derive(seed, 2);
  Image base = harness::textured_base(240, 240, rng::derive(seed, 1));
  return harness::synth_pair(base, spec);
}

}  // namespace

TEST_CASE("starting at the true transform stays put") {
  auto pair = make_pair(11);
  geometry::RefineConfig cfg;
  auto res = geometry::refine_homography(pair.x, pair.y, pair.h_true, cfg);
  CHECK(!res.diverged);
  CHECK(res.final_rmse <= res.initial_rmse);
  CHECK(corner_error(res.h, pair.h_true, pair.y.width(), pair.y.height()) <
        0.05);
  CHECK(res.iterations <= 5);
}

TEST_CASE("half-pixel perturbations are pulled back under a tenth of a pixel") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    auto pair = make_pair(seed);
    const int w = pair.y.width(), h = pair.y.height();
    Homography h0 = perturb_corners(pair.h_true, w, h, 0.5, seed * 31 + 1);
    const double before = corner_error(h0, pair.h_true, w, h);
    CHECK(before > 0.3);

    geometry::RefineConfig cfg;
    auto res = geometry::refine_homography(pair.x, pair.y, h0, cfg);
    CHECK(!res.diverged);
    CHECK(res.final_rmse <= res.initial_rmse);
    const double after = corner_error(res.h, pair.h_true, w, h);
    CHECK(after < 0.1);
    CHECK(after < before / 5.0);
  }
}

TEST_CASE("textureless images terminate immediately with the input") {
  Image flat_x(64, 64, 1, 0.5);
  Image flat_y(64, 64, 1, 0.5);
  geometry::RefineConfig cfg;
  auto res = geometry::refine_homography(flat_x, flat_y,
                                         Homography::identity(), cfg);
  CHECK(!res.diverged);
  CHECK(res.h.values() == Homography::identity().values());
  CHECK(res.iterations <= 1);
  CHECK(res.final_rmse == res.initial_rmse);
}

TEST_CASE("zero iteration budget returns the input with its error") {
  auto pair = make_pair(31);
  geometry::RefineConfig cfg;
  cfg.max_iterations = 0;
  auto res = geometry::refine_homography(pair.x, pair.y, pair.h_true, cfg);
  CHECK(!res.diverged);
  CHECK(res.h.values() == pair.h_true.values());
  CHECK(res.iterations == 0);
  CHECK(res.initial_rmse == res.final_rmse);
  CHECK(res.initial_rmse < 0.1);  // true transform aligns the pair well
}

TEST_CASE("refinement never reports a higher error than the start") {
  for (std::uint64_t seed : {41u, 42u}) {
    auto pair = make_pair(seed);
    Homography h0 = perturb_corners(pair.h_true, pair.y.width(),
                                    pair.y.height(), 2.0, seed * 17 + 5);
    geometry::RefineConfig cfg;
    auto res = geometry::refine_homography(pair.x, pair.y, h0, cfg);
    CHECK(res.final_rmse <= res.initial_rmse);
  }
}
