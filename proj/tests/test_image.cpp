#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <vector>

#include "doctest.h"
#include "rwz/errors.hpp"
#include "rwz/image.hpp"
#include "rwz/rng.hpp"

using rwz::Image;
using rwz::Mask;

namespace {

std::filesystem::path temp_path(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

Image random_image(int h, int w, int c, std::uint64_t seed) {
  std::vector<double> s(static_cast<std::size_t>(h) * w * c);
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = rwz::rng::uniform01(seed, i);
  return Image(h, w, c, std::move(s));
}

}  // namespace

TEST_CASE("image constructor clamps out-of-range and NaN samples") {
  std::vector<double> s = {-0.5, 1.5, std::numeric_limits<double>::quiet_NaN(),
                           0.25};
  Image img(2, 2, 1, std::move(s));
  CHECK(img.at(0, 0) == 0.0);
  CHECK(img.at(0, 1) == 1.0);
  CHECK(img.at(1, 0) == 0.0);
  CHECK(img.at(1, 1) == 0.25);
}

TEST_CASE("image constructor rejects bad shapes") {
  CHECK_THROWS_AS(Image(0, 4, 1), rwz::ConfigError);
  CHECK_THROWS_AS(Image(4, -1, 3), rwz::ConfigError);
  CHECK_THROWS_AS(Image(4, 4, 2), rwz::ConfigError);
  CHECK_THROWS_AS(Image(4, 4, 4), rwz::ConfigError);
  CHECK_THROWS_AS(Image(2, 2, 1, std::vector<double>(3, 0.0)),
                  rwz::ConfigError);
}

TEST_CASE("to_gray applies the Rec.601 weights") {
  Image rgb(1, 3, 3);
  // pure red, pure green, pure blue pixels
  rgb.at(0, 0, 0) = 1.0;
  rgb.at(0, 1, 1) = 1.0;
  rgb.at(0, 2, 2) = 1.0;
  Image g = rgb.to_gray();
  CHECK(g.channels() == 1);
  CHECK(g.at(0, 0) == doctest::Approx(0.299).epsilon(1e-12));
  CHECK(g.at(0, 1) == doctest::Approx(0.587).epsilon(1e-12));
  CHECK(g.at(0, 2) == doctest::Approx(0.114).epsilon(1e-12));

  Image already = random_image(3, 3, 1, 11);
  Image same = already.to_gray();
  CHECK(same.samples() == already.samples());
}

TEST_CASE("to_rgb replicates gray across channels") {
  Image g = random_image(4, 5, 1, 3);
  Image rgb = g.to_rgb();
  REQUIRE(rgb.channels() == 3);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x)
      for (int c = 0; c < 3; ++c) CHECK(rgb.at(y, x, c) == g.at(y, x));
}

TEST_CASE("mask raster round trip and complement") {
  Mask m(3, 4);
  m.set(0, 0, true);
  m.set(2, 3, true);
  m.set(1, 1, true);
  CHECK(m.count_true() == 3);
  CHECK(m.true_fraction() == doctest::Approx(3.0 / 12.0));

  Mask back = Mask::from_raster(m.to_raster());
  CHECK(back.bits() == m.bits());

  Mask inv = m.complement();
  CHECK(inv.count_true() == 9);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) CHECK(inv.at(y, x) == !m.at(y, x));
}

TEST_CASE("apply_mask keeps true pixels and zeroes the rest") {
  Image img = random_image(2, 2, 3, 5);

  Mask all_true(2, 2, true);
  CHECK(rwz::apply_mask(img, all_true).samples() == img.samples());

  Mask all_false(2, 2, false);
  Image blank = rwz::apply_mask(img, all_false);
  for (double v : blank.samples()) CHECK(v == 0.0);

  Mask one(2, 2, false);
  one.set(0, 0, true);
  Image kept = rwz::apply_mask(img, one);
  for (int c = 0; c < 3; ++c) {
    CHECK(kept.at(0, 0, c) == img.at(0, 0, c));
    CHECK(kept.at(0, 1, c) == 0.0);
    CHECK(kept.at(1, 0, c) == 0.0);
    CHECK(kept.at(1, 1, c) == 0.0);
  }

  Mask wrong(3, 2);
  CHECK_THROWS_AS(rwz::apply_mask(img, wrong), rwz::ConfigError);
}

TEST_CASE("residual against the masked complement equals the masked image") {
  Image x = random_image(6, 7, 3, 21);
  Mask m(6, 7, false);
  for (int y = 0; y < 6; ++y)
    for (int x2 = 0; x2 < 7; ++x2)
      if ((y + x2) % 3 == 0) m.set(y, x2, true);

  Image x_star = rwz::apply_mask(x, m.complement());
  Image r = rwz::residual(x, x_star);
  Image expect = rwz::apply_mask(x, m);
  CHECK(r.samples() == expect.samples());

  Image zeros(6, 7, 3, 0.0);
  CHECK(rwz::residual(x, zeros).samples() == x.samples());
  Image self = rwz::residual(x, x);
  for (double v : self.samples()) CHECK(v == 0.0);
  CHECK_THROWS_AS(rwz::residual(x, Image(6, 6, 3)), rwz::ConfigError);
}

TEST_CASE("png save/load round trip within one quantization step") {
  Image img = random_image(13, 9, 3, 77);
  auto path = temp_path("rwz_test_roundtrip.png");
  rwz::save_image(img, path.string());
  Image back = rwz::load_image(path.string());
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i)
    CHECK(std::abs(back.samples()[i] - img.samples()[i]) <= 1.0 / 255.0);

  // second save of the loaded result reproduces the samples exactly
  auto path2 = temp_path("rwz_test_roundtrip2.png");
  rwz::save_image(back, path2.string());
  Image again = rwz::load_image(path2.string());
  CHECK(again.samples() == back.samples());
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("ppm and pgm round trips") {
  Image rgb = random_image(5, 8, 3, 101);
  auto ppm = temp_path("rwz_test.ppm");
  rwz::save_image(rgb, ppm.string());
  Image rgb_back = rwz::load_image(ppm.string());
  REQUIRE(rgb_back.same_shape(rgb));
  for (std::size_t i = 0; i < rgb.size(); ++i)
    CHECK(std::abs(rgb_back.samples()[i] - rgb.samples()[i]) <= 1.0 / 255.0);

  Image gray = random_image(4, 4, 1, 102);
  auto pgm = temp_path("rwz_test.pgm");
  rwz::save_image(gray, pgm.string());
  Image gray_back = rwz::load_image(pgm.string());
  REQUIRE(gray_back.same_shape(gray));
  for (std::size_t i = 0; i < gray.size(); ++i)
    CHECK(std::abs(gray_back.samples()[i] - gray.samples()[i]) <= 1.0 / 255.0);

  Image zeros(3, 3, 1, 0.0);
  rwz::save_image(zeros, pgm.string());
  CHECK(rwz::load_image(pgm.string()).samples() == zeros.samples());
  std::filesystem::remove(ppm);
  std::filesystem::remove(pgm);
}

TEST_CASE("image io failure modes") {
  CHECK_THROWS_AS(rwz::load_image("/nonexistent/dir/img.png"), rwz::IoError);
  CHECK_THROWS_AS(rwz::save_image(Image(2, 2, 1), "/nonexistent/dir/img.png"),
                  rwz::IoError);

  auto bad = temp_path("rwz_test_truncated.ppm");
  {
    std::FILE* f = std::fopen(bad.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("P6\n4 4", f);  // header cut short
    std::fclose(f);
  }
  CHECK_THROWS_AS(rwz::load_image(bad.string()), rwz::IoError);
  std::filesystem::remove(bad);
}
