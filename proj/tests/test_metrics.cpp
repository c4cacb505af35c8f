#include <doctest.h>

#include <cmath>
#include <random>

#include "nlretinex/metrics.hpp"
#include "oracles.hpp"

using namespace nlretinex;

namespace {

ColorImage flip(const ColorImage& a) {
  ColorImage out(a.channels(), a.grid());
  const Grid& g = a.grid();
  for (int k = 0; k < a.channels(); ++k)
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < g.width; ++x) out.at(k, g.index(g.width - 1 - x, y)) = a.at(k, g.index(x, y));
  return out;
}

}  // namespace

TEST_CASE("PSNR closed forms") {
  const Grid g{8, 8};
  std::mt19937_64 rng(1);
  const ColorImage a = oracle::random_image(rng, 3, g);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(std::abs(psnr(ColorImage(3, g, 0.0), ColorImage(3, g, 0.1)) - 20.0) < 1e-9);
  CHECK(std::abs(psnr(ColorImage(3, g, 0.0), ColorImage(3, g, 0.5)) - 6.020599913279624) < 1e-9);
  CHECK_THROWS_AS(psnr(ColorImage(3, g), ColorImage(3, Grid{8, 7})), ContractViolation);
}

TEST_CASE("PSNR is symmetric and flip invariant") {
  std::mt19937_64 rng(2);
  const ColorImage a = oracle::random_image(rng, 3, Grid{16, 12}), b = oracle::random_image(rng, 3, Grid{16, 12});
  CHECK(psnr(a, b) == psnr(b, a));
  CHECK(std::abs(psnr(flip(a), flip(b)) - psnr(a, b)) < 1e-12);
}

TEST_CASE("Gaussian taps") {
  const auto t = gaussian_taps(11, 1.5);
  REQUIRE(t.size() == 11);
  double s = 0.0;
  for (double v : t) s += v;
  CHECK(std::abs(s - 1.0) < 1e-15);
  CHECK(t[5] > t[4]);
  CHECK(t[0] == doctest::Approx(t[10]).epsilon(1e-15));
}

TEST_CASE("SSIM self comparison and bounds") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ColorImage a = oracle::random_image(rng, 3, Grid{20, 17});
    CHECK(std::abs(ssim(a, a) - 1.0) < 1e-12);
    SsimParams mean_params;
    mean_params.color = SsimColor::kChannelMean;
    CHECK(std::abs(ssim(a, a, mean_params) - 1.0) < 1e-12);
    const ColorImage b = oracle::random_image(rng, 3, Grid{20, 17});
    const double s = ssim(a, b);
    CHECK(s <= 1.0);
    CHECK(s >= -1.0);
    CHECK(s < 1.0 - 1e-12);
    CHECK(std::abs(ssim(flip(a), flip(b)) - s) < 1e-12);
  }
}

TEST_CASE("SSIM of a binary image against its complement is negative") {
  const Grid g{16, 16};
  ColorImage a(1, g);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) a.at(0, g.index(x, y)) = ((x / 3 + y / 2) % 2) ? 1.0 : 0.0;
  ColorImage b(1, g);
  for (std::size_t i = 0; i < g.pixels(); ++i) b.at(0, i) = 1.0 - a.at(0, i);
  CHECK(ssim(a, b) < 0.0);
}

TEST_CASE("SSIM windows match the direct oracle") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Grid g{19 + trial, 15};
    const ColorImage a = oracle::random_image(rng, 1, g, 0.1, 0.8);
    ColorImage b = a;
    if (trial == 0) {
      for (double& v : b.values()) v += 0.1;  // pure luminance shift
    } else {
      b = oracle::random_image(rng, 1, g, 0.1, 0.8);
    }
    const SsimParams p;
    const auto map = ssim_map(a.channel(0), b.channel(0), g, p);
    const int mw = g.width - p.window + 1, mh = g.height - p.window + 1;
    REQUIRE(map.size() == static_cast<std::size_t>(mw * mh));
    for (int y = 0; y < mh; ++y) {
      for (int x = 0; x < mw; ++x) {
        CHECK(std::abs(map[y * mw + x] - oracle::ssim_window(a.channel(0), b.channel(0), g, x, y, p)) < 1e-10);
      }
    }
    if (trial == 0) {
      // contrast and structure are exactly 1; only the luminance term remains
      const double c1 = 0.01 * 0.01;
      const auto taps = gaussian_taps(11, 1.5);
      double mu = 0.0;
      for (int v = 0; v < 11; ++v)
        for (int u = 0; u < 11; ++u) mu += taps[u] * taps[v] * a.at(0, g.index(u, v));
      const double mb = mu + 0.1;
      CHECK(std::abs(map[0] - (2 * mu * mb + c1) / (mu * mu + mb * mb + c1)) < 1e-10);
    }
  }
}

TEST_CASE("SSIM colour conventions") {
  std::mt19937_64 rng(5);
  const ColorImage a = oracle::random_image(rng, 3, Grid{14, 14}), b = oracle::random_image(rng, 3, Grid{14, 14});
  SsimParams p;
  p.color = SsimColor::kChannelMean;
  double expect = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto m = ssim_map(a.channel(k), b.channel(k), a.grid(), p);
    double s = 0.0;
    for (double v : m) s += v;
    expect += s / static_cast<double>(m.size()) / 3.0;
  }
  CHECK(std::abs(ssim(a, b, p) - expect) < 1e-12);

  const ColorImage la = to_luma(a);
  REQUIRE(la.channels() == 1);
  CHECK(la.at(0, 3) == doctest::Approx(0.299 * a.at(0, 3) + 0.587 * a.at(1, 3) + 0.114 * a.at(2, 3)).epsilon(1e-15));
}

TEST_CASE("SSIM rejects images smaller than the window") {
  CHECK_THROWS_AS(ssim(ColorImage(1, Grid{10, 20}), ColorImage(1, Grid{10, 20})), WindowTooLarge);
  CHECK_THROWS_AS(ssim(ColorImage(1, Grid{10, 20}), ColorImage(1, Grid{11, 20})), ContractViolation);
}
