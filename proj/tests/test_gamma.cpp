#include <doctest.h>

#include <cmath>
#include <random>

#include "nlretinex/gamma.hpp"
#include "oracles.hpp"

using namespace nlretinex;

TEST_CASE("constant fields have closed-form gammas") {
  for (double c : {0.05, 0.1, 0.25, 0.3, 0.5, 0.7, 0.9}) {
    CAPTURE(c);
    const std::vector<double> l(50, c);
    const GammaResult r = auto_gamma(l);
    REQUIRE(r.interior());
    CHECK(std::abs(r.gamma - std::log(0.5) / std::log(c)) < 1e-9);
  }
  CHECK(std::abs(auto_gamma(std::vector<double>(4, 0.25)).gamma - 0.5) < 1e-9);
  CHECK(std::abs(auto_gamma(std::vector<double>(4, 0.5)).gamma - 1.0) < 1e-9);
}

TEST_CASE("two-pixel field matches the bisection oracle") {
  const std::vector<double> l{0.25, 0.64};
  const GammaResult r = auto_gamma(l);
  const double expect = oracle::bisect_gamma(l, 0.5, 1e-4, 0.05, 20.0, 1e-10);
  CHECK(r.interior());
  CHECK(std::abs(r.gamma - expect) < 1e-6);
  CHECK(r.newton_steps + r.bisection_steps <= 20);
}

TEST_CASE("Newton agrees with bisection on random fields") {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> lo(0.01, 0.4), span(0.05, 0.6);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = lo(rng), b = std::min(0.999, a + span(rng));
    std::uniform_real_distribution<double> d(a, b);
    std::vector<double> l(200);
    for (double& v : l) v = d(rng);
    const GammaResult r = auto_gamma(l);
    REQUIRE(r.interior());
    CHECK(std::abs(r.gamma - oracle::bisect_gamma(l, 0.5, 1e-4, 0.05, 20.0, 1e-10)) < 1e-6);
    CHECK(std::abs(mean_power(l, r.gamma, 1e-4) - 0.5) < 1e-6);
  }
}

TEST_CASE("out-of-range roots clamp and are flagged") {
  SUBCASE("fully lit") {
    const GammaResult r = auto_gamma(std::vector<double>(9, 1.0));
    CHECK(r.status == GammaStatus::kFullyLit);
    CHECK(r.gamma == 1.0);
  }
  SUBCASE("root above the clamp") {
    // 0.999^20 is still far above 0.5
    const GammaResult r = auto_gamma(std::vector<double>(9, 0.999));
    CHECK(r.status == GammaStatus::kClampedHigh);
    CHECK(r.gamma == 20.0);
  }
  SUBCASE("root below the clamp") {
    // 1e-4^0.05 ~ 0.63 is still above 0.5; ask for a brighter target
    GammaParams p;
    p.target = 0.9;
    const GammaResult r = auto_gamma(std::vector<double>(9, 1e-4), p);
    CHECK(r.status == GammaStatus::kClampedLow);
    CHECK(r.gamma == 0.05);
  }
  SUBCASE("zeros are floored, not excluded") {
    const std::vector<double> l{0.0, 0.5, 0.5, 0.5};
    const GammaResult r = auto_gamma(l);
    REQUIRE(r.interior());
    CHECK(std::abs(mean_power(l, r.gamma, 1e-4) - 0.5) < 1e-6);
  }
}

TEST_CASE("F changes sign once over the clamp interval") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.02, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> l(64);
    for (double& v : l) v = d(rng);
    int changes = 0;
    double prev = mean_power(l, 0.05, 1e-4) - 0.5;
    for (double g = 0.06; g <= 20.0; g += 0.01) {
      const double f = mean_power(l, g, 1e-4) - 0.5;
      CHECK(f < prev);
      changes += (f < 0) != (prev < 0);
      prev = f;
    }
    CHECK(changes == 1);
  }
}

TEST_CASE("enhance examples") {
  const Grid g{2, 2};
  std::mt19937_64 rng(4);
  const ColorImage r = oracle::random_image(rng, 3, g);
  const ScalarField l = oracle::random_scalar(rng, g);
  SUBCASE("unit gamma multiplies") {
    const ColorImage out = enhance(r, l, 1.0);
    for (int k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < 4; ++i) CHECK(out.at(k, i) == doctest::Approx(l[i] * r.at(k, i)));
  }
  SUBCASE("unit illumination returns R") {
    CHECK(max_abs_diff(enhance(r, ScalarField(g, 1.0), 0.37).values(), r.values()) <= 1e-15);
  }
  SUBCASE("hand value") {
    const ColorImage out = enhance(ColorImage(1, Grid{1, 1}, 0.8), ScalarField(Grid{1, 1}, 0.25), 0.5);
    CHECK(out.at(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
  }
  SUBCASE("monotone in R") {
    ColorImage brighter = r;
    for (double& v : brighter.values()) v = std::min(1.0, v + 0.05);
    const ColorImage a = enhance(r, l, 0.6), b = enhance(brighter, l, 0.6);
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(b.values()[n] >= a.values()[n]);
  }
}

TEST_CASE("gamma parameters are validated") {
  GammaParams p;
  p.target = 1.0;
  CHECK_THROWS_AS(p.validate(), ContractViolation);
  p = {};
  p.gamma_min = 2.0;
  p.gamma_max = 1.0;
  CHECK_THROWS_AS(p.validate(), ContractViolation);
  CHECK_THROWS_AS(auto_gamma(std::vector<double>{}), ContractViolation);
}
