#pragma once

#include <vector>

#include "nlretinex/gamma.hpp"
#include "nlretinex/image.hpp"

namespace nlretinex {

struct ColorCorrectionParams {
  double vartheta = 0.5;
  friend bool operator==(const ColorCorrectionParams&, const ColorCorrectionParams&) = default;

  void validate() const;
};

struct GuideParams {
  double denoise_strength = 0.1;  // similarity bandwidth of the nonlocal-means filter
  int search_radius = 5;
  int patch_radius = 1;
  double target_mean = 0.5;
  friend bool operator==(const GuideParams&, const GuideParams&) = default;

  void validate() const;
};

std::vector<double> channel_means(const ColorImage& img);

/// Index of the channel whose mean is closest to 0.5; ties go to the lowest index.
int reference_channel(const std::vector<double>& means);

/// Proportional channel compensation towards the reference channel:
///   out_k = I_k + vartheta (M_ref - M_k) (1 - I_k) I_ref   for k != ref,
/// clamped to [0,1]. Single-channel input is returned unchanged.
ColorImage color_correct(const ColorImage& img, const ColorCorrectionParams& params = {});

/// Nonlocal-means denoiser sharing the patch-distance code with the Retinex weights.
ColorImage denoise(const ColorImage& img, const GuideParams& params = {});

struct Guide {
  ColorImage image;
  std::vector<GammaResult> channel_gamma;
};

/// Denoises, then gamma-corrects each channel so its mean hits target_mean.
Guide build_guide_with_gammas(const ColorImage& img_tilde, const GuideParams& params = {},
                              const GammaParams& gamma = {});
ColorImage build_guide(const ColorImage& img_tilde, const GuideParams& params = {});

}  // namespace nlretinex
