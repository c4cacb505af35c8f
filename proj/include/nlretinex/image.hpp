#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlretinex {

/// Raised when two operands disagree on grid, channel count or stencil size.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Pixel grid shared by every field. Pixel index is row-major: i = y * width + x.
struct Grid {
  int width = 0;
  int height = 0;

  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Planar (channel-major) multi-channel image. Channel k occupies
/// data[k * M, (k + 1) * M).
class ColorImage {
 public:
  ColorImage() = default;
  ColorImage(int channels, Grid grid, double fill = 0.0);
  ColorImage(int channels, Grid grid, std::vector<double> data);

  int channels() const { return channels_; }
  const Grid& grid() const { return grid_; }
  int width() const { return grid_.width; }
  int height() const { return grid_.height; }
  std::size_t pixels() const { return grid_.pixels(); }
  std::size_t size() const { return data_.size(); }

  double& at(int k, std::size_t i) { return data_[k * pixels() + i]; }
  double at(int k, std::size_t i) const { return data_[k * pixels() + i]; }

  std::span<double> channel(int k) { return {data_.data() + k * pixels(), pixels()}; }
  std::span<const double> channel(int k) const { return {data_.data() + k * pixels(), pixels()}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool same_shape(const ColorImage& other) const {
    return channels_ == other.channels_ && grid_ == other.grid_;
  }

  friend bool operator==(const ColorImage&, const ColorImage&) = default;

 private:
  int channels_ = 0;
  Grid grid_{};
  std::vector<double> data_;
};

/// Single-channel field over the pixel grid (illumination and friends).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Grid grid, double fill = 0.0) : grid_(grid), data_(grid.pixels(), fill) {}
  ScalarField(Grid grid, std::vector<double> data);

  const Grid& grid() const { return grid_; }
  int width() const { return grid_.width; }
  int height() const { return grid_.height; }
  std::size_t pixels() const { return grid_.pixels(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  Grid grid_{};
  std::vector<double> data_;
};

/// Forward-difference gradients: for every channel k, a horizontal (t = 0)
/// and a vertical (t = 1) plane. Layout [k][t][i].
class GradField {
 public:
  GradField() = default;
  GradField(int channels, Grid grid, double fill = 0.0)
      : channels_(channels), grid_(grid), data_(static_cast<std::size_t>(channels) * 2 * grid.pixels(), fill) {}

  int channels() const { return channels_; }
  const Grid& grid() const { return grid_; }
  std::size_t pixels() const { return grid_.pixels(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> plane(int k, int t) { return {data_.data() + (2 * k + t) * pixels(), pixels()}; }
  std::span<const double> plane(int k, int t) const { return {data_.data() + (2 * k + t) * pixels(), pixels()}; }

  double& at(int k, int t, std::size_t i) { return data_[(2 * k + t) * pixels() + i]; }
  double at(int k, int t, std::size_t i) const { return data_[(2 * k + t) * pixels() + i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const GradField& other) const {
    return channels_ == other.channels_ && grid_ == other.grid_;
  }

 private:
  int channels_ = 0;
  Grid grid_{};
  std::vector<double> data_;
};

// Elementwise helpers used across modules.
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
bool all_finite(std::span<const double> a);
void clamp_unit(std::span<double> a);

/// Pairwise summation over a fixed tree, independent of thread count.
double pairwise_sum(std::span<const double> a);

ColorImage clamped(ColorImage img);

}  // namespace nlretinex
