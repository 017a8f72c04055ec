#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rwz/features.hpp"
#include "rwz/image.hpp"
#include "rwz/rng.hpp"
#include "rwz/synth.hpp"

using namespace rwz;
using features::Descriptor;
using features::Keypoint;

namespace {

Image checkerboard(int size, int cell) {
  Image img(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      img.at(y, x) = ((y / cell) + (x / cell)) % 2 ? 1.0 : 0.0;
  return img;
}

Descriptor random_descriptor(rng::Stream& s) {
  Descriptor d;
  for (auto& w : d.bits) w = s.next_u64();
  return d;
}

Descriptor flip_bits(const Descriptor& d, int count, rng::Stream& s) {
  Descriptor out = d;
  for (int i = 0; i < count; ++i) {
    const auto bit = s.next_below(256);
    out.bits[bit >> 6] ^= (1ULL << (bit & 63));
  }
  return out;
}

}  // namespace

TEST_CASE("constant image has no keypoints") {
  CHECK(features::detect_keypoints(Image(32, 32, 1, 0.5)).empty());
  CHECK(features::detect_keypoints(Image(32, 32, 3, 0.0)).empty());
}

TEST_CASE("single white pixel is found within one pixel") {
  Image img(32, 32, 1, 0.0);
  img.at(13, 17) = 1.0;
  auto kps = features::detect_keypoints(img);
  REQUIRE(!kps.empty());
  bool hit = false;
  for (const auto& kp : kps)
    if (std::abs(kp.x - 17.0) <= 1.0 && std::abs(kp.y - 13.0) <= 1.0)
      hit = true;
  CHECK(hit);
}

TEST_CASE("checkerboard corner count matches the junction lattice") {
  const int cell = 8, size = 64;
  Image img = checkerboard(size, cell);
  auto kps = features::detect_keypoints(img, 500);

  // 7x7 interior junctions for 8-px cells on a 64-px board
  const int expected = 49;
  int near_junction = 0;
  for (const auto& kp : kps) {
    if (kp.x < 4 || kp.y < 4 || kp.x > size - 5 || kp.y > size - 5) continue;
    const double jx = std::round(kp.x / cell) * cell;
    const double jy = std::round(kp.y / cell) * cell;
    if (std::abs(kp.x - jx) <= 2.0 && std::abs(kp.y - jy) <= 2.0)
      ++near_junction;
  }
  CHECK(near_junction >= expected * 4 / 5);
  CHECK(near_junction <= expected * 6 / 5);

  // scores sorted descending
  for (std::size_t i = 1; i < kps.size(); ++i)
    CHECK(kps[i - 1].score >= kps[i].score);
}

TEST_CASE("describe drops border keypoints and maps the survivors") {
  Image img = harness::textured_base(64, 64, 4);
  std::vector<Keypoint> kps = {
      {2.0, 30.0, 1.0},   // 2 px from the left border: dropped
      {32.0, 32.0, 1.0},  // interior: kept
      {30.0, 62.0, 1.0},  // 2 px from the bottom: dropped
      {20.0, 20.0, 1.0},  // interior: kept
  };
  auto res = features::describe(img, kps);
  REQUIRE(res.descriptors.size() == 2);
  REQUIRE(res.kept.size() == 2);
  CHECK(res.kept[0] == 1);
  CHECK(res.kept[1] == 3);
}

TEST_CASE("descriptors are deterministic and translation invariant") {
  // plant the same random patch at two distant locations
  const int patch = 33, half = patch / 2;
  Image img(96, 96, 1, 0.5);
  const int cx1 = 30, cy1 = 30, cx2 = 65, cy2 = 60;
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx) {
      const double v = rng::uniform01(
          99, static_cast<std::uint64_t>((dy + half) * patch + dx + half));
      img.at(cy1 + dy, cx1 + dx) = v;
      img.at(cy2 + dy, cx2 + dx) = v;
    }
  std::vector<Keypoint> kps = {{double(cx1), double(cy1), 1.0},
                               {double(cx2), double(cy2), 1.0}};
  auto res = features::describe(img, kps);
  REQUIRE(res.descriptors.size() == 2);
  CHECK(res.descriptors[0].bits == res.descriptors[1].bits);

  auto res2 = features::describe(img, kps);
  CHECK(res2.descriptors[0].bits == res.descriptors[0].bits);
}

TEST_CASE("identical descriptor lists match as the identity") {
  rng::Stream s(7);
  std::vector<Descriptor> a;
  for (int i = 0; i < 20; ++i) a.push_back(random_descriptor(s));
  auto matches = features::match_indices(a, a, 0.75);
  REQUIRE(matches.size() == 20);
  for (const auto& m : matches) {
    CHECK(m.a == m.b);
    CHECK(m.distance == 0);
  }
}

TEST_CASE("all-identical candidates fail the ratio test") {
  rng::Stream s(8);
  std::vector<Descriptor> a = {random_descriptor(s), random_descriptor(s)};
  std::vector<Descriptor> b(10, random_descriptor(s));
  CHECK(features::match_indices(a, b, 0.75).empty());
}

TEST_CASE("planted correspondences are recovered among distractors") {
  rng::Stream s(2024);
  const int planted = 50, distractors = 100;
  std::vector<Descriptor> a, b;
  for (int i = 0; i < planted; ++i) {
    a.push_back(random_descriptor(s));
    b.push_back(flip_bits(a.back(), 8, s));  // <= 10 bits of noise
  }
  for (int i = 0; i < distractors; ++i) b.push_back(random_descriptor(s));

  // premise check: planted partner close, everything else far
  for (int i = 0; i < planted; ++i) {
    CHECK(a[i].hamming(b[i]) <= 10);
    for (int j = 0; j < static_cast<int>(b.size()); ++j)
      if (j != i) CHECK(a[i].hamming(b[j]) >= 80);
  }

  auto matches = features::match_indices(a, b, 0.75);
  int correct = 0;
  for (const auto& m : matches)
    if (m.a == m.b) ++correct;
  CHECK(correct >= planted * 95 / 100);
  CHECK(static_cast<int>(matches.size()) == correct);  // no false pairs
}

TEST_CASE("self-matching a textured image gives zero displacement") {
  Image img = harness::textured_base(96, 96, 17);
  auto kps = features::detect_keypoints(img, 200);
  REQUIRE(kps.size() >= 10);
  auto des = features::describe(img, kps);
  std::vector<Keypoint> kept;
  for (int idx : des.kept) kept.push_back(kps[idx]);
  auto pairs = features::match(kept, des.descriptors, kept, des.descriptors);
  REQUIRE(!pairs.empty());
  for (const auto& p : pairs) {
    CHECK(p.x1 == p.x2);
    CHECK(p.y1 == p.y2);
    CHECK(p.distance == 0);
  }
}
