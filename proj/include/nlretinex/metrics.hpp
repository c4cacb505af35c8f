#pragma once

#include <stdexcept>
#include <vector>

#include "nlretinex/image.hpp"

namespace nlretinex {

class WindowTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SsimColor {
  kLuma,         // BT.601 luma of RGB input
  kChannelMean,  // average of per-channel SSIM
};

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
  SsimColor color = SsimColor::kLuma;
};

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
};

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) for peak 1, capped at 99 dB.
double psnr(const ColorImage& a, const ColorImage& b);

double ssim(const ColorImage& a, const ColorImage& b, const SsimParams& params = {});

/// Per-window SSIM over all fully-contained windows, row-major, of size
/// (W - window + 1) x (H - window + 1).
std::vector<double> ssim_map(std::span<const double> a, std::span<const double> b, Grid grid,
                             const SsimParams& params = {});

/// Normalised 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int size, double sigma);

ColorImage to_luma(const ColorImage& img);

MetricReport evaluate(const ColorImage& enhanced, const ColorImage& reference, const SsimParams& params = {});

}  // namespace nlretinex
