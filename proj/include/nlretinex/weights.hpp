#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "nlretinex/image.hpp"

namespace nlretinex {

struct Offset {
  int dx = 0;
  int dy = 0;
};

/// How the centre weight w_{i,i} is chosen before normalisation.
enum class SelfWeight {
  kWindowMax,  // max over the other in-window weights (Retinex priors)
  kUnit,       // exp(0) = 1, the classic nonlocal-means choice
};

/// Dense per-pixel stencil of K = (2 nu + 1)^2 weights over a square search
/// window. Storage is offset-major, [j][i], so that for a fixed offset the
/// pixel loop is contiguous. Offsets leaving the image carry weight zero.
class NLWeights {
 public:
  NLWeights() = default;
  NLWeights(Grid grid, int nu);

  const Grid& grid() const { return grid_; }
  int nu() const { return nu_; }
  std::size_t stencil_size() const { return offsets_.size(); }
  std::size_t center() const { return offsets_.size() / 2; }
  const std::vector<Offset>& offsets() const { return offsets_; }

  std::span<double> weights(std::size_t j) { return {w_.data() + j * grid_.pixels(), grid_.pixels()}; }
  std::span<const double> weights(std::size_t j) const { return {w_.data() + j * grid_.pixels(), grid_.pixels()}; }
  std::span<const double> sqrt_weights(std::size_t j) const {
    return {sqrt_w_.data() + j * grid_.pixels(), grid_.pixels()};
  }
  double weight(std::size_t i, std::size_t j) const { return w_[j * grid_.pixels() + i]; }

  std::span<double> normalizer() { return gamma_; }
  std::span<const double> normalizer() const { return gamma_; }

  std::span<const double> all_weights() const { return w_; }

  /// Recomputes the square-root table after the weights were written.
  void finalize();

  /// Single-offset stencil with unit weight: the local (Kronecker) case.
  static NLWeights identity(Grid grid);

 private:
  Grid grid_{};
  int nu_ = 0;
  std::vector<Offset> offsets_;
  std::vector<double> w_;
  std::vector<double> sqrt_w_;
  std::vector<double> gamma_;
};

/// Gradient-patch weights: one stencil per gradient direction t.
struct NLGradWeights {
  std::array<NLWeights, 2> direction;

  const Grid& grid() const { return direction[0].grid(); }
  std::size_t stencil_size() const { return direction[0].stencil_size(); }

  static NLGradWeights identity(Grid grid) { return {{NLWeights::identity(grid), NLWeights::identity(grid)}}; }
};

struct WeightParams {
  // intensity weights
  int nu = 5;
  int kappa = 1;
  double h_spt = 7.0;  // infinity disables the spatial term
  double h_sim = 0.1;
  // gradient weights
  int nu_hat = 5;
  int kappa_hat = 1;
  double h_sim_hat = 0.05;
  // build the intensity weights on the denoised image instead of the colour-corrected one
  bool from_denoised = false;
  friend bool operator==(const WeightParams&, const WeightParams&) = default;

  void validate() const;
};

/// Squared Euclidean distance between the (2 kappa + 1)^2 patches of a around
/// i and of b around j, summed over channels. Samples outside the image use
/// half-sample symmetric extension.
double patch_distance(const ColorImage& a, const ColorImage& b, std::size_t i, std::size_t j, int kappa);

/// Intensity-patch weights with spatial decay; rows sum to one.
NLWeights build_intensity_weights(const ColorImage& guide, const WeightParams& params,
                                  SelfWeight self = SelfWeight::kWindowMax);

/// Stencil weights from patch distances alone (h_spt = infinity). Shared by the
/// gradient weights and the nonlocal-means denoiser.
NLWeights build_similarity_weights(std::span<const std::span<const double>> planes, Grid grid, int nu, int kappa,
                                   double h_spt, double h_sim, SelfWeight self);

/// Per-direction weights on the t-components of the guide gradient.
NLGradWeights build_gradient_weights(const GradField& guide_grad, const WeightParams& params);

/// Binary dump: "NLW1", little-endian u32 width, height, nu, directions, then
/// f64 weights [t][j][i] and f64 normalisers [t][i].
void save_weights(const std::filesystem::path& path, std::span<const NLWeights* const> directions);
void save_weights(const std::filesystem::path& path, const NLWeights& w);
void save_weights(const std::filesystem::path& path, const NLGradWeights& w);
NLWeights load_intensity_weights(const std::filesystem::path& path);
NLGradWeights load_gradient_weights(const std::filesystem::path& path);

int reflect_index(int x, int n);

}  // namespace nlretinex
