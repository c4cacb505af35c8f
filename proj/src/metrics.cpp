#include "nlretinex/metrics.hpp"

#include <cmath>
#include <string>

namespace nlretinex {
namespace {

void require_same(const ColorImage& a, const ColorImage& b, const char* what) {
  if (!a.same_shape(b)) throw ContractViolation(std::string(what) + ": image dimensions differ");
}

// Separable "valid" filtering of a plane with the Gaussian taps.
std::vector<double> filter_valid(std::span<const double> plane, Grid g, const std::vector<double>& taps) {
  const int n = static_cast<int>(taps.size());
  const int ow = g.width - n + 1;
  const int oh = g.height - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += taps[t] * plane[g.index(x + t, y)];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += taps[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const ColorImage& a, const ColorImage& b) {
  require_same(a, b, "psnr");
  std::vector<double> sq(a.size());
  for (std::size_t n = 0; n < sq.size(); ++n) {
    const double d = a.raw()[n] - b.raw()[n];
    sq[n] = d * d;
  }
  const double mse = pairwise_sum(sq) / static_cast<double>(sq.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> taps(size);
  const double c = 0.5 * (size - 1);
  double total = 0.0;
  for (int t = 0; t < size; ++t) {
    taps[t] = std::exp(-((t - c) * (t - c)) / (2.0 * sigma * sigma));
    total += taps[t];
  }
  for (double& v : taps) v /= total;
  return taps;
}

std::vector<double> ssim_map(std::span<const double> a, std::span<const double> b, Grid grid,
                             const SsimParams& params) {
  if (grid.width < params.window || grid.height < params.window) {
    throw WindowTooLarge("ssim: image " + std::to_string(grid.width) + "x" + std::to_string(grid.height) +
                         " is smaller than the " + std::to_string(params.window) + "x" +
                         std::to_string(params.window) + " window");
  }
  const auto taps = gaussian_taps(params.window, params.sigma);
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, grid, taps);
  const auto mu_b = filter_valid(b, grid, taps);
  const auto e_aa = filter_valid(aa, grid, taps);
  const auto e_bb = filter_valid(bb, grid, taps);
  const auto e_ab = filter_valid(ab, grid, taps);

  const double c1 = (params.k1 * params.peak) * (params.k1 * params.peak);
  const double c2 = (params.k2 * params.peak) * (params.k2 * params.peak);
  std::vector<double> map(mu_a.size());
  for (std::size_t n = 0; n < map.size(); ++n) {
    const double va = e_aa[n] - mu_a[n] * mu_a[n];
    const double vb = e_bb[n] - mu_b[n] * mu_b[n];
    const double cov = e_ab[n] - mu_a[n] * mu_b[n];
    const double num = (2.0 * mu_a[n] * mu_b[n] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[n] * mu_a[n] + mu_b[n] * mu_b[n] + c1) * (va + vb + c2);
    map[n] = num / den;
  }
  return map;
}

ColorImage to_luma(const ColorImage& img) {
  if (img.channels() != 3) throw ContractViolation("to_luma: expects 3 channels");
  ColorImage out(1, img.grid());
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    out.at(0, i) = 0.299 * img.at(0, i) + 0.587 * img.at(1, i) + 0.114 * img.at(2, i);
  }
  return out;
}

double ssim(const ColorImage& a, const ColorImage& b, const SsimParams& params) {
  require_same(a, b, "ssim");
  if (params.color == SsimColor::kLuma && a.channels() == 3) {
    const ColorImage la = to_luma(a);
    const ColorImage lb = to_luma(b);
    const auto map = ssim_map(la.channel(0), lb.channel(0), a.grid(), params);
    return pairwise_sum(map) / static_cast<double>(map.size());
  }
  double total = 0.0;
  for (int k = 0; k < a.channels(); ++k) {
    const auto map = ssim_map(a.channel(k), b.channel(k), a.grid(), params);
    total += pairwise_sum(map) / static_cast<double>(map.size());
  }
  return total / a.channels();
}

MetricReport evaluate(const ColorImage& enhanced, const ColorImage& reference, const SsimParams& params) {
  return {psnr(enhanced, reference), ssim(enhanced, reference, params)};
}

}  // namespace nlretinex
