#include "nlretinex/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nlretinex {
namespace {

struct Moments {
  double value;       // F(gamma)
  double derivative;  // F'(gamma)
};

Moments evaluate(std::span<const double> floored, std::span<const double> logs, double gamma, double target,
                 std::vector<double>& scratch_a, std::vector<double>& scratch_b) {
  for (std::size_t i = 0; i < floored.size(); ++i) {
    const double p = std::pow(floored[i], gamma);
    scratch_a[i] = p;
    scratch_b[i] = p * logs[i];
  }
  const double m = static_cast<double>(floored.size());
  return {pairwise_sum(scratch_a) / m - target, pairwise_sum(scratch_b) / m};
}

}  // namespace

void GammaParams::validate() const {
  if (!(target > 0.0 && target < 1.0)) throw ContractViolation("gamma: target must lie in (0,1)");
  if (!(gamma_min > 0.0 && gamma_min < gamma_max)) throw ContractViolation("gamma: need 0 < gamma_min < gamma_max");
  if (!(tol > 0.0) || !(l_floor > 0.0) || max_newton_iters < 0) {
    throw ContractViolation("gamma: tol, l_floor must be positive");
  }
}

const char* to_string(GammaStatus s) {
  switch (s) {
    case GammaStatus::kConverged: return "converged";
    case GammaStatus::kClampedLow: return "clamped_low";
    case GammaStatus::kClampedHigh: return "clamped_high";
    case GammaStatus::kFullyLit: return "fully_lit";
  }
  return "unknown";
}

double mean_power(std::span<const double> illumination, double gamma, double l_floor) {
  std::vector<double> terms(illumination.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = std::pow(std::max(illumination[i], l_floor), gamma);
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

GammaResult auto_gamma(std::span<const double> illumination, const GammaParams& params) {
  params.validate();
  if (illumination.empty()) throw ContractViolation("auto_gamma: empty illumination");

  std::vector<double> floored(illumination.size());
  std::vector<double> logs(illumination.size());
  bool fully_lit = true;
  for (std::size_t i = 0; i < floored.size(); ++i) {
    floored[i] = std::max(illumination[i], params.l_floor);
    logs[i] = std::log(floored[i]);
    fully_lit = fully_lit && floored[i] >= 1.0;
  }
  if (fully_lit) return {1.0, GammaStatus::kFullyLit, 0, 0, 1.0 - params.target};

  std::vector<double> a(floored.size()), b(floored.size());
  auto F = [&](double g) { return evaluate(floored, logs, g, params.target, a, b); };

  double lo = params.gamma_min;
  double hi = params.gamma_max;
  const Moments at_lo = F(lo);
  if (at_lo.value <= 0.0) {
    const auto status = std::abs(at_lo.value) < params.tol ? GammaStatus::kConverged : GammaStatus::kClampedLow;
    return {lo, status, 0, 0, at_lo.value};
  }
  const Moments at_hi = F(hi);
  if (at_hi.value >= 0.0) {
    const auto status = std::abs(at_hi.value) < params.tol ? GammaStatus::kConverged : GammaStatus::kClampedHigh;
    return {hi, status, 0, 0, at_hi.value};
  }

  // F is decreasing, F(lo) > 0 > F(hi).
  GammaResult result;
  double g = std::clamp(params.gamma_init, lo, hi);
  constexpr int kMaxBisections = 200;
  while (result.bisection_steps < kMaxBisections) {
    const Moments m = F(g);
    if (std::abs(m.value) < params.tol) {
      // One polishing step; Newton is quadratic here so it only tightens the residual.
      if (std::abs(m.derivative) >= 1e-12) {
        const double next = g - m.value / m.derivative;
        if (next > lo && next < hi) {
          const Moments mn = F(next);
          if (std::abs(mn.value) < std::abs(m.value)) {
            result.gamma = next;
            result.residual = mn.value;
            result.status = GammaStatus::kConverged;
            return result;
          }
        }
      }
      result.gamma = g;
      result.residual = m.value;
      result.status = GammaStatus::kConverged;
      return result;
    }
    if (m.value > 0.0) {
      lo = g;
    } else {
      hi = g;
    }
    if (result.newton_steps < params.max_newton_iters && std::abs(m.derivative) >= 1e-12) {
      const double next = g - m.value / m.derivative;
      if (next > lo && next < hi) {
        g = next;
        ++result.newton_steps;
        continue;
      }
    }
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) break;
    g = 0.5 * (lo + hi);
    ++result.bisection_steps;
  }
  result.gamma = g;
  result.residual = F(g).value;
  result.status = GammaStatus::kConverged;
  return result;
}

GammaResult auto_gamma(const ScalarField& illumination, const GammaParams& params) {
  return auto_gamma(illumination.values(), params);
}

ColorImage enhance(const ColorImage& reflectance, const ScalarField& illumination, double gamma) {
  if (reflectance.grid() != illumination.grid()) throw ContractViolation("enhance: grid mismatch");
  ColorImage out(reflectance.channels(), reflectance.grid());
  for (std::size_t i = 0; i < reflectance.pixels(); ++i) {
    const double lg = std::pow(illumination[i], gamma);
    for (int k = 0; k < reflectance.channels(); ++k) {
      out.at(k, i) = std::clamp(lg * reflectance.at(k, i), 0.0, 1.0);
    }
  }
  return out;
}

ScalarField power(const ScalarField& illumination, double gamma) {
  ScalarField out(illumination.grid());
  for (std::size_t i = 0; i < out.pixels(); ++i) out[i] = std::pow(illumination[i], gamma);
  return out;
}

}  // namespace nlretinex
