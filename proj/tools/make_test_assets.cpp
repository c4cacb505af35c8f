// Generates the synthetic low/normal-light pairs under tests/data.
//   make_test_assets <out_dir>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "nlretinex/image.hpp"
#include "nlretinex/image_io.hpp"

using namespace nlretinex;

namespace {

constexpr int kSize = 64;

struct Scene {
  const char* name;
  double light_level;  // mean illumination of the dark capture
  double noise_sigma;  // additive gaussian noise in the dark capture
  int pattern;
};

ColorImage reflectance(int pattern) {
  ColorImage r(3, Grid{kSize, kSize});
  const double pi = std::numbers::pi;
  for (int y = 0; y < kSize; ++y) {
    for (int x = 0; x < kSize; ++x) {
      const std::size_t i = r.grid().index(x, y);
      double c[3];
      if (pattern == 0) {
        // checkerboard tiles with a diagonal stripe texture
        const bool tile = ((x / 8) + (y / 8)) % 2 == 0;
        const double stripe = 0.5 + 0.5 * std::sin(2.0 * pi * (x + y) / 6.0);
        c[0] = tile ? 0.75 + 0.15 * stripe : 0.30;
        c[1] = tile ? 0.55 + 0.10 * stripe : 0.45;
        c[2] = tile ? 0.35 : 0.65 + 0.10 * stripe;
      } else if (pattern == 1) {
        // discs on a smooth background
        const double bx = static_cast<double>(x) / (kSize - 1);
        const double by = static_cast<double>(y) / (kSize - 1);
        c[0] = 0.35 + 0.3 * bx;
        c[1] = 0.40 + 0.2 * by;
        c[2] = 0.55 - 0.2 * bx;
        const double d1 = std::hypot(x - 20.0, y - 22.0);
        const double d2 = std::hypot(x - 44.0, y - 40.0);
        if (d1 < 12.0) {
          c[0] = 0.85;
          c[1] = 0.25;
          c[2] = 0.20;
        }
        if (d2 < 10.0) {
          c[0] = 0.20;
          c[1] = 0.70;
          c[2] = 0.85;
        }
        if (std::abs(d2 - 10.0) < 1.0) c[0] = c[1] = c[2] = 0.95;
      } else {
        // repeated brick texture
        const int row = y / 6;
        const int shift = (row % 2) * 5;
        const bool mortar = (y % 6 == 0) || ((x + shift) % 10 == 0);
        const double grain = 0.05 * std::sin(1.7 * x + 0.9 * y);
        c[0] = mortar ? 0.85 : 0.65 + grain;
        c[1] = mortar ? 0.82 : 0.35 + grain;
        c[2] = mortar ? 0.78 : 0.25 + grain;
      }
      for (int k = 0; k < 3; ++k) r.at(k, i) = c[k];
    }
  }
  return r;
}

// Smooth spatially varying light, normalised to the requested mean.
ScalarField illumination(double mean_level, int pattern) {
  ScalarField l(Grid{kSize, kSize});
  double total = 0.0;
  for (int y = 0; y < kSize; ++y) {
    for (int x = 0; x < kSize; ++x) {
      const double u = static_cast<double>(x) / (kSize - 1);
      const double v = static_cast<double>(y) / (kSize - 1);
      const double cx = pattern == 1 ? 0.3 : 0.7;
      const double g = 0.6 + 0.4 * std::exp(-((u - cx) * (u - cx) + (v - 0.4) * (v - 0.4)) / 0.15);
      l[l.grid().index(x, y)] = g;
      total += g;
    }
  }
  const double scale = mean_level / (total / static_cast<double>(l.grid().pixels()));
  for (double& v : l.values()) v *= scale;
  return l;
}

ColorImage compose(const ColorImage& r, const ScalarField& l) {
  ColorImage out(r.channels(), r.grid());
  for (int k = 0; k < r.channels(); ++k) {
    for (std::size_t i = 0; i < r.grid().pixels(); ++i) out.at(k, i) = r.at(k, i) * l[i];
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_test_assets <out_dir>\n");
    return 2;
  }
  const std::filesystem::path out = argv[1];
  std::filesystem::create_directories(out / "low");
  std::filesystem::create_directories(out / "high");

  const Scene scenes[] = {
      {"1.png", 0.10, 0.0, 0},
      {"2.png", 0.12, 0.0, 1},
      {"3.png", 0.12, 0.06, 2},
  };
  std::mt19937_64 rng(20240611);
  for (const Scene& s : scenes) {
    const ColorImage r = reflectance(s.pattern);
    const ColorImage high = compose(r, illumination(0.5, s.pattern));
    ColorImage low = compose(r, illumination(s.light_level, s.pattern));
    if (s.noise_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, s.noise_sigma);
      for (double& v : low.values()) v += noise(rng);
    }
    save_image(clamped(high), out / "high" / s.name, BitDepth::k8);
    save_image(clamped(std::move(low)), out / "low" / s.name, BitDepth::k8);
  }
  return 0;
}
