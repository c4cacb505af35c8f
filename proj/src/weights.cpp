#include "nlretinex/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "nlretinex/image_io.hpp"

namespace nlretinex {
namespace {

using Planes = std::span<const std::span<const double>>;

double distance(Planes a, Planes b, const Grid& grid, int xi, int yi, int xj, int yj, int kappa) {
  double d = 0.0;
  const bool inside = xi - kappa >= 0 && yi - kappa >= 0 && xj - kappa >= 0 && yj - kappa >= 0 &&
                      xi + kappa < grid.width && yi + kappa < grid.height && xj + kappa < grid.width &&
                      yj + kappa < grid.height;
  for (int zy = -kappa; zy <= kappa; ++zy) {
    for (int zx = -kappa; zx <= kappa; ++zx) {
      std::size_t ia, ib;
      if (inside) {
        ia = grid.index(xi + zx, yi + zy);
        ib = grid.index(xj + zx, yj + zy);
      } else {
        ia = grid.index(reflect_index(xi + zx, grid.width), reflect_index(yi + zy, grid.height));
        ib = grid.index(reflect_index(xj + zx, grid.width), reflect_index(yj + zy, grid.height));
      }
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k][ia] - b[k][ib];
        d += diff * diff;
      }
    }
  }
  return d;
}

std::vector<std::span<const double>> channel_planes(const ColorImage& img) {
  std::vector<std::span<const double>> planes;
  for (int k = 0; k < img.channels(); ++k) planes.push_back(img.channel(k));
  return planes;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int s = 0; s < 8; ++s) b[s] = static_cast<unsigned char>(bits >> (8 * s));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw ImageIoError("weight file truncated");
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ImageIoError("weight file truncated");
  std::uint64_t bits = 0;
  for (int s = 0; s < 8; ++s) bits |= std::uint64_t{b[s]} << (8 * s);
  return std::bit_cast<double>(bits);
}

std::vector<NLWeights> load_directions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(path.string() + ": cannot open weight file");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "NLW1", 4) != 0) {
    throw ImageIoError(path.string() + ": bad magic, expected NLW1");
  }
  const auto width = static_cast<int>(get_u32(in));
  const auto height = static_cast<int>(get_u32(in));
  const auto nu = static_cast<int>(get_u32(in));
  const auto dirs = get_u32(in);
  if (width < 1 || height < 1 || dirs < 1 || dirs > 2 || nu > 64) {
    throw ImageIoError(path.string() + ": implausible weight header");
  }
  std::vector<NLWeights> out;
  for (std::uint32_t t = 0; t < dirs; ++t) out.emplace_back(Grid{width, height}, nu);
  for (auto& w : out) {
    for (std::size_t j = 0; j < w.stencil_size(); ++j) {
      for (double& v : w.weights(j)) v = get_f64(in);
    }
  }
  for (auto& w : out) {
    for (double& v : w.normalizer()) v = get_f64(in);
    w.finalize();
  }
  return out;
}

}  // namespace

int reflect_index(int x, int n) {
  if (n == 1) return 0;
  while (x < 0 || x >= n) {
    if (x < 0) x = -x - 1;
    if (x >= n) x = 2 * n - x - 1;
  }
  return x;
}

NLWeights::NLWeights(Grid grid, int nu) : grid_(grid), nu_(nu) {
  if (nu < 0) throw ContractViolation("NLWeights: negative search radius");
  for (int dy = -nu; dy <= nu; ++dy) {
    for (int dx = -nu; dx <= nu; ++dx) offsets_.push_back({dx, dy});
  }
  w_.assign(offsets_.size() * grid.pixels(), 0.0);
  sqrt_w_.assign(w_.size(), 0.0);
  gamma_.assign(grid.pixels(), 0.0);
}

void NLWeights::finalize() {
  for (std::size_t n = 0; n < w_.size(); ++n) sqrt_w_[n] = std::sqrt(w_[n]);
}

NLWeights NLWeights::identity(Grid grid) {
  NLWeights w(grid, 0);
  std::fill(w.w_.begin(), w.w_.end(), 1.0);
  std::fill(w.gamma_.begin(), w.gamma_.end(), 1.0);
  w.finalize();
  return w;
}

void WeightParams::validate() const {
  if (nu < 1 || nu_hat < 1) throw ContractViolation("weights: search radii must be >= 1");
  if (kappa < 0 || kappa_hat < 0) throw ContractViolation("weights: patch radii must be >= 0");
  if (!(h_spt > 0) || !(h_sim > 0) || !(h_sim_hat > 0)) {
    throw ContractViolation("weights: filtering parameters must be positive");
  }
}

double patch_distance(const ColorImage& a, const ColorImage& b, std::size_t i, std::size_t j, int kappa) {
  if (!a.same_shape(b)) throw ContractViolation("patch_distance: image shapes differ");
  const Grid& g = a.grid();
  if (i >= g.pixels() || j >= g.pixels()) throw ContractViolation("patch_distance: pixel out of range");
  const auto pa = channel_planes(a);
  const auto pb = channel_planes(b);
  const int w = g.width;
  return distance(pa, pb, g, static_cast<int>(i % w), static_cast<int>(i / w), static_cast<int>(j % w),
                  static_cast<int>(j / w), kappa);
}

NLWeights build_similarity_weights(Planes planes, Grid grid, int nu, int kappa, double h_spt, double h_sim,
                                   SelfWeight self) {
  NLWeights w(grid, nu);
  const auto& offsets = w.offsets();
  const std::size_t K = offsets.size();
  const std::size_t center = w.center();
  const double spt2 = h_spt * h_spt;
  const double sim2 = h_sim * h_sim;

#pragma omp parallel for schedule(static)
  for (int y = 0; y < grid.height; ++y) {
    std::vector<double> raw(K);
    for (int x = 0; x < grid.width; ++x) {
      const std::size_t i = grid.index(x, y);
      double max_other = 0.0;
      bool any_other = false;
      for (std::size_t j = 0; j < K; ++j) {
        raw[j] = 0.0;
        if (j == center) continue;
        const int nx = x + offsets[j].dx;
        const int ny = y + offsets[j].dy;
        if (!grid.contains(nx, ny)) continue;
        const double d = distance(planes, planes, grid, x, y, nx, ny, kappa);
        const double spatial = static_cast<double>(offsets[j].dx * offsets[j].dx + offsets[j].dy * offsets[j].dy);
        raw[j] = std::exp(-spatial / spt2 - d / sim2);
        max_other = std::max(max_other, raw[j]);
        any_other = true;
      }
      // A pixel whose neighbours all underflow keeps only itself.
      raw[center] = (self == SelfWeight::kUnit || !any_other || max_other == 0.0) ? 1.0 : max_other;
      double gamma = 0.0;
      for (std::size_t j = 0; j < K; ++j) gamma += raw[j];
      w.normalizer()[i] = gamma;
      for (std::size_t j = 0; j < K; ++j) w.weights(j)[i] = raw[j] / gamma;
    }
  }
  w.finalize();
  return w;
}

NLWeights build_intensity_weights(const ColorImage& guide, const WeightParams& params, SelfWeight self) {
  const auto planes = channel_planes(guide);
  return build_similarity_weights(planes, guide.grid(), params.nu, params.kappa, params.h_spt, params.h_sim, self);
}

NLGradWeights build_gradient_weights(const GradField& guide_grad, const WeightParams& params) {
  NLGradWeights out;
  const double no_spatial = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 2; ++t) {
    std::vector<std::span<const double>> planes;
    for (int k = 0; k < guide_grad.channels(); ++k) planes.push_back(guide_grad.plane(k, t));
    out.direction[t] = build_similarity_weights(planes, guide_grad.grid(), params.nu_hat, params.kappa_hat,
                                                no_spatial, params.h_sim_hat, SelfWeight::kWindowMax);
  }
  return out;
}

void save_weights(const std::filesystem::path& path, std::span<const NLWeights* const> directions) {
  if (directions.empty()) throw ContractViolation("save_weights: nothing to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError(path.string() + ": cannot open weight file for writing");
  const NLWeights& first = *directions.front();
  out.write("NLW1", 4);
  put_u32(out, static_cast<std::uint32_t>(first.grid().width));
  put_u32(out, static_cast<std::uint32_t>(first.grid().height));
  put_u32(out, static_cast<std::uint32_t>(first.nu()));
  put_u32(out, static_cast<std::uint32_t>(directions.size()));
  for (const NLWeights* w : directions) {
    for (double v : w->all_weights()) put_f64(out, v);
  }
  for (const NLWeights* w : directions) {
    for (double v : w->normalizer()) put_f64(out, v);
  }
  if (!out) throw ImageIoError(path.string() + ": write failed");
}

void save_weights(const std::filesystem::path& path, const NLWeights& w) {
  const NLWeights* dirs[] = {&w};
  save_weights(path, dirs);
}

void save_weights(const std::filesystem::path& path, const NLGradWeights& w) {
  const NLWeights* dirs[] = {&w.direction[0], &w.direction[1]};
  save_weights(path, dirs);
}

NLWeights load_intensity_weights(const std::filesystem::path& path) {
  auto dirs = load_directions(path);
  if (dirs.size() != 1) throw ImageIoError(path.string() + ": expected one weight direction");
  return std::move(dirs.front());
}

NLGradWeights load_gradient_weights(const std::filesystem::path& path) {
  auto dirs = load_directions(path);
  if (dirs.size() != 2) throw ImageIoError(path.string() + ": expected two weight directions");
  return {{std::move(dirs[0]), std::move(dirs[1])}};
}

}  // namespace nlretinex
