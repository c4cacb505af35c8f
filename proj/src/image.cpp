#include "nlretinex/image.hpp"

#include <algorithm>
#include <cmath>

namespace nlretinex {

ColorImage::ColorImage(int channels, Grid grid, double fill)
    : channels_(channels), grid_(grid), data_(static_cast<std::size_t>(channels) * grid.pixels(), fill) {
  if (channels < 1 || grid.width < 1 || grid.height < 1) {
    throw ContractViolation("ColorImage: channels and dimensions must be positive");
  }
}

ColorImage::ColorImage(int channels, Grid grid, std::vector<double> data)
    : channels_(channels), grid_(grid), data_(std::move(data)) {
  if (channels < 1 || grid.width < 1 || grid.height < 1) {
    throw ContractViolation("ColorImage: channels and dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(channels) * grid.pixels()) {
    throw ContractViolation("ColorImage: data size does not match channels x pixels");
  }
}

ScalarField::ScalarField(Grid grid, std::vector<double> data) : grid_(grid), data_(std::move(data)) {
  if (data_.size() != grid.pixels()) {
    throw ContractViolation("ScalarField: data size does not match pixel count");
  }
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

void clamp_unit(std::span<double> a) {
  for (double& v : a) v = std::clamp(v, 0.0, 1.0);
}

double pairwise_sum(std::span<const double> a) {
  constexpr std::size_t kLeaf = 64;
  if (a.size() <= kLeaf) {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
  }
  const std::size_t half = a.size() / 2;
  return pairwise_sum(a.first(half)) + pairwise_sum(a.subspan(half));
}

ColorImage clamped(ColorImage img) {
  clamp_unit(img.values());
  return img;
}

}  // namespace nlretinex
