#pragma once

#include <span>
#include <vector>

#include "nlretinex/image.hpp"
#include "nlretinex/weights.hpp"

namespace nlretinex {

/// Values on the nonlocal stencil, layout [k][j][i]: the nonlocal gradient of
/// a colour image and its dual variable.
class NLField {
 public:
  NLField() = default;
  NLField(int channels, Grid grid, std::size_t stencil)
      : channels_(channels), grid_(grid), stencil_(stencil),
        data_(static_cast<std::size_t>(channels) * stencil * grid.pixels(), 0.0) {}

  int channels() const { return channels_; }
  const Grid& grid() const { return grid_; }
  std::size_t stencil_size() const { return stencil_; }

  std::span<double> slice(int k, std::size_t j) { return {data_.data() + (k * stencil_ + j) * grid_.pixels(), grid_.pixels()}; }
  std::span<const double> slice(int k, std::size_t j) const {
    return {data_.data() + (k * stencil_ + j) * grid_.pixels(), grid_.pixels()};
  }
  double& at(int k, std::size_t i, std::size_t j) { return data_[(k * stencil_ + j) * grid_.pixels() + i]; }
  double at(int k, std::size_t i, std::size_t j) const { return data_[(k * stencil_ + j) * grid_.pixels() + i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

 private:
  int channels_ = 0;
  Grid grid_{};
  std::size_t stencil_ = 0;
  std::vector<double> data_;
};

/// Values of the nonlocal gradient-fidelity map, layout [k][t][j][i].
class NLGradFidField {
 public:
  NLGradFidField() = default;
  NLGradFidField(int channels, Grid grid, std::size_t stencil)
      : channels_(channels), grid_(grid), stencil_(stencil),
        data_(static_cast<std::size_t>(channels) * 2 * stencil * grid.pixels(), 0.0) {}

  int channels() const { return channels_; }
  const Grid& grid() const { return grid_; }
  std::size_t stencil_size() const { return stencil_; }

  std::span<double> slice(int k, int t, std::size_t j) {
    return {data_.data() + ((2 * k + t) * stencil_ + j) * grid_.pixels(), grid_.pixels()};
  }
  std::span<const double> slice(int k, int t, std::size_t j) const {
    return {data_.data() + ((2 * k + t) * stencil_ + j) * grid_.pixels(), grid_.pixels()};
  }
  double& at(int k, std::size_t i, std::size_t j, int t) {
    return data_[((2 * k + t) * stencil_ + j) * grid_.pixels() + i];
  }
  double at(int k, std::size_t i, std::size_t j, int t) const {
    return data_[((2 * k + t) * stencil_ + j) * grid_.pixels() + i];
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

 private:
  int channels_ = 0;
  Grid grid_{};
  std::size_t stencil_ = 0;
  std::vector<double> data_;
};

// Local operators. Forward differences with a zero last column/row; div is
// the negative adjoint of grad.
GradField grad(const ColorImage& u);
GradField grad(const ScalarField& u);
ColorImage div(const GradField& p);
ScalarField div_scalar(const GradField& p);

// Nonlocal operators. nl_div is the negative adjoint of nl_grad.
NLField nl_grad(const ColorImage& u, const NLWeights& w);
ColorImage nl_div(const NLField& p, const NLWeights& w);

/// Entries sqrt(w_{i,j,t}) ((grad R)_{k,i,t} - (grad guide)_{k,j,t}).
NLGradFidField nlgf_forward(const GradField& grad_r, const GradField& grad_guide, const NLGradWeights& w);
/// div of the 2-vector field v_{k,i,t} = sum_j sqrt(w_{i,j,t}) q_{k,i,j,t}.
ColorImage nlgf_adjoint(const NLGradFidField& q, const NLGradWeights& w);

// Fused forms used by the solver to avoid materialising the forward fields.

/// p <- p + s * nl_grad(u)
void nl_grad_accumulate(NLField& p, const ColorImage& u, const NLWeights& w, double s);
/// q <- c * (q + s * nlgf_forward(grad_r, grad_guide))
void nlgf_accumulate_shrink(NLGradFidField& q, const GradField& grad_r, const GradField& grad_guide,
                            const NLGradWeights& w, double s, double c);
/// Per pixel, sum over channels and stencil of nl_grad(u)^2.
std::vector<double> nl_grad_pixel_sq(const ColorImage& u, const NLWeights& w);
/// Per pixel, sum over channels, directions and stencil of nlgf_forward(...)^2.
std::vector<double> nlgf_pixel_sq(const GradField& grad_r, const GradField& grad_guide, const NLGradWeights& w);
/// Per pixel, sum over channels and stencil of p^2.
std::vector<double> slice_pixel_sq(const NLField& p);
/// Per pixel, sum over channels and directions of g^2.
std::vector<double> grad_pixel_sq(const GradField& g);

}  // namespace nlretinex
