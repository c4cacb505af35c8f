#include "nlretinex/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlretinex/weights.hpp"

namespace nlretinex {

void ColorCorrectionParams::validate() const {
  if (!std::isfinite(vartheta) || vartheta < 0.0) throw ContractViolation("color correction: vartheta must be >= 0");
}

void GuideParams::validate() const {
  if (!(denoise_strength > 0.0)) throw ContractViolation("guide: denoise_strength must be positive");
  if (!(target_mean > 0.0 && target_mean < 1.0)) throw ContractViolation("guide: target_mean must lie in (0,1)");
  if (search_radius < 1 || patch_radius < 0) throw ContractViolation("guide: invalid denoiser radii");
}

std::vector<double> channel_means(const ColorImage& img) {
  std::vector<double> means(img.channels());
  for (int k = 0; k < img.channels(); ++k) {
    means[k] = pairwise_sum(img.channel(k)) / static_cast<double>(img.pixels());
  }
  return means;
}

int reference_channel(const std::vector<double>& means) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(means.size()); ++k) {
    if (std::abs(means[k] - 0.5) < std::abs(means[best] - 0.5)) best = k;
  }
  return best;
}

ColorImage color_correct(const ColorImage& img, const ColorCorrectionParams& params) {
  params.validate();
  if (img.channels() < 2) return img;
  const auto means = channel_means(img);
  const int ref = reference_channel(means);
  ColorImage out = img;
  const auto ref_plane = img.channel(ref);
  for (int k = 0; k < img.channels(); ++k) {
    if (k == ref) continue;
    const double shift = params.vartheta * (means[ref] - means[k]);
    const auto src = img.channel(k);
    auto dst = out.channel(k);
    for (std::size_t i = 0; i < img.pixels(); ++i) {
      dst[i] = std::clamp(src[i] + shift * (1.0 - src[i]) * ref_plane[i], 0.0, 1.0);
    }
  }
  return out;
}

ColorImage denoise(const ColorImage& img, const GuideParams& params) {
  params.validate();
  std::vector<std::span<const double>> planes;
  for (int k = 0; k < img.channels(); ++k) planes.push_back(img.channel(k));
  const NLWeights w = build_similarity_weights(planes, img.grid(), params.search_radius, params.patch_radius,
                                               std::numeric_limits<double>::infinity(), params.denoise_strength,
                                               SelfWeight::kUnit);
  const Grid& g = img.grid();
  ColorImage out(img.channels(), g);
  for (int k = 0; k < img.channels(); ++k) {
    const auto src = img.channel(k);
    auto dst = out.channel(k);
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        const std::size_t i = g.index(x, y);
        double acc = 0.0;
        for (std::size_t j = 0; j < w.stencil_size(); ++j) {
          const Offset o = w.offsets()[j];
          if (!g.contains(x + o.dx, y + o.dy)) continue;
          acc += w.weight(i, j) * src[g.index(x + o.dx, y + o.dy)];
        }
        dst[i] = std::clamp(acc, 0.0, 1.0);
      }
    }
  }
  return out;
}

Guide build_guide_with_gammas(const ColorImage& img_tilde, const GuideParams& params, const GammaParams& gamma) {
  params.validate();
  GammaParams gp = gamma;
  gp.target = params.target_mean;
  Guide guide{denoise(img_tilde, params), {}};
  for (int k = 0; k < guide.image.channels(); ++k) {
    auto plane = guide.image.channel(k);
    const GammaResult r = auto_gamma(plane, gp);
    for (double& v : plane) v = std::pow(std::max(v, gp.l_floor), r.gamma);
    guide.channel_gamma.push_back(r);
  }
  return guide;
}

ColorImage build_guide(const ColorImage& img_tilde, const GuideParams& params) {
  return build_guide_with_gammas(img_tilde, params).image;
}

}  // namespace nlretinex
