#include <doctest.h>

#include <cmath>
#include <random>

#include "nlretinex/preprocess.hpp"
#include "oracles.hpp"

using namespace nlretinex;

namespace {

double variance(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

double mean(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("channel_means examples") {
  const auto c = channel_means(ColorImage(3, Grid{4, 2}, 0.3));
  for (double m : c) CHECK(m == doctest::Approx(0.3).epsilon(1e-15));
  const auto one = channel_means(ColorImage(3, Grid{1, 1}, std::vector<double>{0.1, 0.4, 0.9}));
  CHECK(one == std::vector<double>{0.1, 0.4, 0.9});
  const auto two = channel_means(ColorImage(1, Grid{2, 1}, std::vector<double>{0.2, 0.4}));
  CHECK(two[0] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("reference channel is closest to one half, lowest index on ties") {
  CHECK(reference_channel({0.1, 0.4, 0.9}) == 1);
  CHECK(reference_channel({0.4, 0.6, 0.1}) == 0);
  CHECK(reference_channel({0.3, 0.3, 0.3}) == 0);
}

TEST_CASE("color_correct examples") {
  ColorCorrectionParams p;
  SUBCASE("equal means leave the image unchanged") {
    std::mt19937_64 rng(4);
    ColorImage img = oracle::random_image(rng, 1, Grid{4, 4});
    std::vector<double> data;
    for (int k = 0; k < 3; ++k) data.insert(data.end(), img.values().begin(), img.values().end());
    const ColorImage rgb(3, Grid{4, 4}, data);
    for (double v : {0.0, 0.5, 1.0, 2.0}) {
      p.vartheta = v;
      CHECK(color_correct(rgb, p) == rgb);
    }
  }
  SUBCASE("single pixel hand values") {
    const ColorImage img(3, Grid{1, 1}, std::vector<double>{0.1, 0.4, 0.9});
    const ColorImage out = color_correct(img, p);
    CHECK(out.at(0, 0) == doctest::Approx(0.154).epsilon(1e-12));
    CHECK(out.at(1, 0) == 0.4);
    CHECK(out.at(2, 0) == doctest::Approx(0.89).epsilon(1e-12));
  }
  SUBCASE("zero strength") {
    std::mt19937_64 rng(9);
    const ColorImage img = oracle::random_image(rng, 3, Grid{5, 3});
    p.vartheta = 0.0;
    CHECK(color_correct(img, p) == img);
  }
  SUBCASE("gray input is returned unchanged") {
    std::mt19937_64 rng(10);
    const ColorImage img = oracle::random_image(rng, 1, Grid{5, 3});
    CHECK(color_correct(img, p) == img);
  }
}

TEST_CASE("color_correct keeps the reference channel and the unit range") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> th(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ColorImage img = oracle::random_image(rng, 3, Grid{6, 5});
    ColorCorrectionParams p;
    p.vartheta = th(rng);
    const auto means = channel_means(img);
    const int ref = reference_channel(means);
    const ColorImage out = color_correct(img, p);
    CHECK(max_abs_diff(out.channel(ref), img.channel(ref)) == 0.0);
    // the formula never exceeds 1; the clamp only acts below 0
    for (int k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < img.pixels(); ++i) {
        const double raw =
            img.at(k, i) + p.vartheta * (means[ref] - means[k]) * (1.0 - img.at(k, i)) * img.at(ref, i);
        CHECK(raw <= 1.0);
        CHECK(out.at(k, i) == doctest::Approx(std::max(raw, 0.0)).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("color_correct clamps a formula value below zero") {
  // reference channel 1 (mean 0.5), channel 0 mean 0.67, dark red on a bright reference pixel
  const ColorImage img(3, Grid{3, 1}, std::vector<double>{0.01, 1.0, 1.0, 1.0, 0.25, 0.25, 0.2, 0.2, 0.2});
  ColorCorrectionParams p;
  p.vartheta = 1.0;
  const auto means = channel_means(img);
  REQUIRE(reference_channel(means) == 1);
  const double raw = 0.01 + (means[1] - means[0]) * 0.99 * 1.0;
  CHECK(raw < 0.0);
  CHECK(color_correct(img, p).at(0, 0) == 0.0);
}

TEST_CASE("denoise examples") {
  SUBCASE("constant image is a fixed point") {
    const ColorImage c(3, Grid{9, 9}, 0.37);
    CHECK(max_abs_diff(denoise(c).values(), c.values()) <= 1e-15);
  }
  SUBCASE("noise variance drops") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n(0.0, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
      ColorImage img(3, Grid{16, 16}, 0.5);
      for (double& v : img.values()) v = std::clamp(0.5 + n(rng), 0.0, 1.0);
      CHECK(variance(denoise(img).values()) < variance(img.values()));
    }
  }
  SUBCASE("vanishing strength returns the input") {
    std::mt19937_64 rng(6);
    const ColorImage img = oracle::random_image(rng, 3, Grid{12, 10});
    GuideParams p;
    p.denoise_strength = 1e-4;
    CHECK(max_abs_diff(denoise(img, p).values(), img.values()) < 1e-3);
  }
}

TEST_CASE("build_guide examples") {
  SUBCASE("constant 0.25 channel becomes 0.5") {
    const ColorImage g = build_guide(ColorImage(1, Grid{5, 5}, 0.25));
    for (double v : g.values()) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("constant 0.5 channel is unchanged") {
    const Guide g = build_guide_with_gammas(ColorImage(1, Grid{5, 5}, 0.5));
    CHECK(g.channel_gamma[0].gamma == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : g.image.values()) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("two-pixel channel against the bisection oracle") {
    // pixels far apart in value so the denoiser keeps them separate
    GuideParams p;
    p.denoise_strength = 1e-3;
    const ColorImage img(1, Grid{2, 1}, std::vector<double>{0.25, 0.64});
    const Guide g = build_guide_with_gammas(img, p);
    const std::vector<double> l{0.25, 0.64};
    const double expect = oracle::bisect_gamma(l, 0.5, 1e-4, 0.05, 20.0, 1e-12);
    CHECK(g.channel_gamma[0].gamma == doctest::Approx(expect).epsilon(1e-6));
    CHECK(std::abs(mean(g.image.values()) - 0.5) < 1e-6);
  }
}

TEST_CASE("guide channel means hit the target") {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    const ColorImage img = oracle::random_image(rng, 3, Grid{12, 12}, 0.02, 0.3);
    const Guide g = build_guide_with_gammas(img);
    for (int k = 0; k < 3; ++k) {
      REQUIRE(g.channel_gamma[k].interior());
      CHECK(std::abs(mean(g.image.channel(k)) - 0.5) < 1e-3);
    }
  }
}

TEST_CASE("preprocess parameters are validated") {
  ColorCorrectionParams c;
  c.vartheta = -0.1;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  GuideParams g;
  g.denoise_strength = 0.0;
  CHECK_THROWS_AS(g.validate(), ContractViolation);
}
