#pragma once

#include <span>

#include "nlretinex/image.hpp"

namespace nlretinex {

struct GammaParams {
  double target = 0.5;
  double gamma_init = 1.0;
  int max_newton_iters = 50;
  double tol = 1e-6;
  double gamma_min = 0.05;
  double gamma_max = 20.0;
  double l_floor = 1e-4;
  friend bool operator==(const GammaParams&, const GammaParams&) = default;

  void validate() const;
};

enum class GammaStatus {
  kConverged,     // interior root, |F| < tol
  kClampedLow,    // root below gamma_min; gamma_min returned
  kClampedHigh,   // root above gamma_max; gamma_max returned
  kFullyLit,      // every sample is 1; gamma = 1 returned
};

struct GammaResult {
  double gamma = 1.0;
  GammaStatus status = GammaStatus::kConverged;
  int newton_steps = 0;
  int bisection_steps = 0;
  double residual = 0.0;  // F(gamma)

  bool interior() const { return status == GammaStatus::kConverged; }
};

const char* to_string(GammaStatus s);

/// Solves mean(max(L, l_floor)^gamma) = target by Newton's method with a
/// bisection fallback on [gamma_min, gamma_max].
GammaResult auto_gamma(std::span<const double> illumination, const GammaParams& params = {});
GammaResult auto_gamma(const ScalarField& illumination, const GammaParams& params = {});

/// mean(max(L, l_floor)^gamma), reduced in a fixed pairwise order.
double mean_power(std::span<const double> illumination, double gamma, double l_floor);

/// out_{k,i} = L_i^gamma R_{k,i}, clamped to [0,1].
ColorImage enhance(const ColorImage& reflectance, const ScalarField& illumination, double gamma);

/// Element-wise L^gamma.
ScalarField power(const ScalarField& illumination, double gamma);

}  // namespace nlretinex
