#include "nlretinex/operators.hpp"

#include <algorithm>
#include <string>

#include "nlretinex/simd/kernels.hpp"

namespace nlretinex {
namespace {

// Pixels (x, y) whose neighbour (x + dx, y + dy) lies inside the grid.
struct ValidRange {
  int x0, x1, y0, y1;
  std::size_t length() const { return x1 > x0 ? static_cast<std::size_t>(x1 - x0) : 0; }
};

ValidRange valid_range(const Grid& g, const Offset& o) {
  return {std::max(0, -o.dx), std::min(g.width, g.width - o.dx), std::max(0, -o.dy),
          std::min(g.height, g.height - o.dy)};
}

void require(bool ok, const char* what) {
  if (!ok) throw ContractViolation(std::string(what) + ": dimension mismatch");
}

void grad_plane(std::span<const double> u, const Grid& g, std::span<double> gx, std::span<double> gy) {
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const std::size_t i = g.index(x, y);
      gx[i] = x + 1 < g.width ? u[i + 1] - u[i] : 0.0;
      gy[i] = y + 1 < g.height ? u[i + g.width] - u[i] : 0.0;
    }
  }
}

void div_plane(std::span<const double> px, std::span<const double> py, const Grid& g, std::span<double> out) {
  const int W = g.width;
  const int H = g.height;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = g.index(x, y);
      double v = 0.0;
      if (x + 1 < W) v += px[i];
      if (x > 0) v -= px[i - 1];
      if (y + 1 < H) v += py[i];
      if (y > 0) v -= py[i - W];
      out[i] = v;
    }
  }
}

}  // namespace

GradField grad(const ColorImage& u) {
  GradField g(u.channels(), u.grid());
  for (int k = 0; k < u.channels(); ++k) grad_plane(u.channel(k), u.grid(), g.plane(k, 0), g.plane(k, 1));
  return g;
}

GradField grad(const ScalarField& u) {
  GradField g(1, u.grid());
  grad_plane(u.values(), u.grid(), g.plane(0, 0), g.plane(0, 1));
  return g;
}

ColorImage div(const GradField& p) {
  ColorImage out(p.channels(), p.grid());
  for (int k = 0; k < p.channels(); ++k) div_plane(p.plane(k, 0), p.plane(k, 1), p.grid(), out.channel(k));
  return out;
}

ScalarField div_scalar(const GradField& p) {
  require(p.channels() == 1, "div_scalar");
  ScalarField out(p.grid());
  div_plane(p.plane(0, 0), p.plane(0, 1), p.grid(), out.values());
  return out;
}

NLField nl_grad(const ColorImage& u, const NLWeights& w) {
  require(u.grid() == w.grid(), "nl_grad");
  NLField out(u.channels(), u.grid(), w.stencil_size());
  const auto& kern = simd::kernels();
  const Grid& g = u.grid();
  for (int k = 0; k < u.channels(); ++k) {
    const double* uk = u.channel(k).data();
    for (std::size_t j = 0; j < w.stencil_size(); ++j) {
      const Offset o = w.offsets()[j];
      const ValidRange r = valid_range(g, o);
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(o.dy) * g.width + o.dx;
      double* dst = out.slice(k, j).data();
      const double* sw = w.sqrt_weights(j).data();
#pragma omp parallel for schedule(static)
      for (int y = r.y0; y < r.y1; ++y) {
        const std::size_t i = g.index(r.x0, y);
        kern.weighted_diff(dst + i, sw + i, uk + i, uk + i + shift, r.length());
      }
    }
  }
  return out;
}

ColorImage nl_div(const NLField& p, const NLWeights& w) {
  require(p.grid() == w.grid() && p.stencil_size() == w.stencil_size(), "nl_div");
  const Grid& g = p.grid();
  ColorImage out(p.channels(), g);
  const auto& kern = simd::kernels();
  for (int k = 0; k < p.channels(); ++k) {
    double* dst = out.channel(k).data();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < g.height; ++y) {
      for (std::size_t j = 0; j < w.stencil_size(); ++j) {
        const Offset o = w.offsets()[j];
        const ValidRange r = valid_range(g, o);
        const double* sw = w.sqrt_weights(j).data();
        const double* pj = p.slice(k, j).data();
        // outgoing: -sum_j sqrt(w_ij) p_ij
        if (y >= r.y0 && y < r.y1) {
          const std::size_t i = g.index(r.x0, y);
          kern.sub_product(dst + i, sw + i, pj + i, r.length());
        }
        // incoming: + sqrt(w_sj) p_sj for the source s = i - offset pointing at i
        const int sy = y - o.dy;
        if (sy >= r.y0 && sy < r.y1) {
          const std::size_t s = g.index(r.x0, sy);
          const std::size_t i = g.index(r.x0 + o.dx, y);
          kern.accum_product(dst + i, sw + s, pj + s, r.length());
        }
      }
    }
  }
  return out;
}

NLGradFidField nlgf_forward(const GradField& grad_r, const GradField& grad_guide, const NLGradWeights& w) {
  require(grad_r.same_shape(grad_guide) && grad_r.grid() == w.grid(), "nlgf_forward");
  NLGradFidField out(grad_r.channels(), grad_r.grid(), w.stencil_size());
  const auto& kern = simd::kernels();
  const Grid& g = grad_r.grid();
  for (int k = 0; k < grad_r.channels(); ++k) {
    for (int t = 0; t < 2; ++t) {
      const NLWeights& wt = w.direction[t];
      const double* a = grad_r.plane(k, t).data();
      const double* b = grad_guide.plane(k, t).data();
      for (std::size_t j = 0; j < wt.stencil_size(); ++j) {
        const Offset o = wt.offsets()[j];
        const ValidRange r = valid_range(g, o);
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(o.dy) * g.width + o.dx;
        double* dst = out.slice(k, t, j).data();
        const double* sw = wt.sqrt_weights(j).data();
#pragma omp parallel for schedule(static)
        for (int y = r.y0; y < r.y1; ++y) {
          const std::size_t i = g.index(r.x0, y);
          kern.weighted_diff(dst + i, sw + i, a + i, b + i + shift, r.length());
        }
      }
    }
  }
  return out;
}

ColorImage nlgf_adjoint(const NLGradFidField& q, const NLGradWeights& w) {
  require(q.grid() == w.grid() && q.stencil_size() == w.stencil_size(), "nlgf_adjoint");
  const Grid& g = q.grid();
  GradField v(q.channels(), g);
  const auto& kern = simd::kernels();
  for (int k = 0; k < q.channels(); ++k) {
    for (int t = 0; t < 2; ++t) {
      const NLWeights& wt = w.direction[t];
      double* dst = v.plane(k, t).data();
#pragma omp parallel for schedule(static)
      for (int y = 0; y < g.height; ++y) {
        for (std::size_t j = 0; j < wt.stencil_size(); ++j) {
          const ValidRange r = valid_range(g, wt.offsets()[j]);
          if (y < r.y0 || y >= r.y1) continue;
          const std::size_t i = g.index(r.x0, y);
          kern.accum_product(dst + i, wt.sqrt_weights(j).data() + i, q.slice(k, t, j).data() + i, r.length());
        }
      }
    }
  }
  return div(v);
}

void nl_grad_accumulate(NLField& p, const ColorImage& u, const NLWeights& w, double s) {
  require(p.grid() == u.grid() && p.channels() == u.channels() && p.stencil_size() == w.stencil_size() &&
              u.grid() == w.grid(),
          "nl_grad_accumulate");
  const auto& kern = simd::kernels();
  const Grid& g = u.grid();
  for (int k = 0; k < u.channels(); ++k) {
    const double* uk = u.channel(k).data();
    for (std::size_t j = 0; j < w.stencil_size(); ++j) {
      const Offset o = w.offsets()[j];
      const ValidRange r = valid_range(g, o);
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(o.dy) * g.width + o.dx;
      double* dst = p.slice(k, j).data();
      const double* sw = w.sqrt_weights(j).data();
#pragma omp parallel for schedule(static)
      for (int y = r.y0; y < r.y1; ++y) {
        const std::size_t i = g.index(r.x0, y);
        kern.accum_weighted_diff(dst + i, sw + i, uk + i, uk + i + shift, s, r.length());
      }
    }
  }
}

void nlgf_accumulate_shrink(NLGradFidField& q, const GradField& grad_r, const GradField& grad_guide,
                            const NLGradWeights& w, double s, double c) {
  require(grad_r.same_shape(grad_guide) && grad_r.grid() == w.grid() && q.grid() == w.grid() &&
              q.channels() == grad_r.channels() && q.stencil_size() == w.stencil_size(),
          "nlgf_accumulate_shrink");
  const auto& kern = simd::kernels();
  const Grid& g = grad_r.grid();
  for (int k = 0; k < grad_r.channels(); ++k) {
    for (int t = 0; t < 2; ++t) {
      const NLWeights& wt = w.direction[t];
      const double* a = grad_r.plane(k, t).data();
      const double* b = grad_guide.plane(k, t).data();
      for (std::size_t j = 0; j < wt.stencil_size(); ++j) {
        const Offset o = wt.offsets()[j];
        const ValidRange r = valid_range(g, o);
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(o.dy) * g.width + o.dx;
        double* dst = q.slice(k, t, j).data();
        const double* sw = wt.sqrt_weights(j).data();
#pragma omp parallel for schedule(static)
        for (int y = 0; y < g.height; ++y) {
          double* row = dst + g.index(0, y);
          if (y >= r.y0 && y < r.y1 && r.length() > 0) {
            const std::size_t i = g.index(r.x0, y);
            kern.shrink_weighted_diff(dst + i, sw + i, a + i, b + i + shift, s, c, r.length());
            for (int x = 0; x < r.x0; ++x) row[x] *= c;
            for (int x = r.x1; x < g.width; ++x) row[x] *= c;
          } else {
            for (int x = 0; x < g.width; ++x) row[x] *= c;
          }
        }
      }
    }
  }
}

std::vector<double> nl_grad_pixel_sq(const ColorImage& u, const NLWeights& w) {
  require(u.grid() == w.grid(), "nl_grad_pixel_sq");
  const Grid& g = u.grid();
  std::vector<double> acc(g.pixels(), 0.0);
  const auto& kern = simd::kernels();
  for (int k = 0; k < u.channels(); ++k) {
    const double* uk = u.channel(k).data();
    for (std::size_t j = 0; j < w.stencil_size(); ++j) {
      const Offset o = w.offsets()[j];
      const ValidRange r = valid_range(g, o);
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(o.dy) * g.width + o.dx;
      const double* sw = w.sqrt_weights(j).data();
#pragma omp parallel for schedule(static)
      for (int y = r.y0; y < r.y1; ++y) {
        const std::size_t i = g.index(r.x0, y);
        kern.accum_sq_weighted_diff(acc.data() + i, sw + i, uk + i, uk + i + shift, r.length());
      }
    }
  }
  return acc;
}

std::vector<double> nlgf_pixel_sq(const GradField& grad_r, const GradField& grad_guide, const NLGradWeights& w) {
  require(grad_r.same_shape(grad_guide) && grad_r.grid() == w.grid(), "nlgf_pixel_sq");
  const Grid& g = grad_r.grid();
  std::vector<double> acc(g.pixels(), 0.0);
  const auto& kern = simd::kernels();
  for (int k = 0; k < grad_r.channels(); ++k) {
    for (int t = 0; t < 2; ++t) {
      const NLWeights& wt = w.direction[t];
      const double* a = grad_r.plane(k, t).data();
      const double* b = grad_guide.plane(k, t).data();
      for (std::size_t j = 0; j < wt.stencil_size(); ++j) {
        const Offset o = wt.offsets()[j];
        const ValidRange r = valid_range(g, o);
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(o.dy) * g.width + o.dx;
        const double* sw = wt.sqrt_weights(j).data();
#pragma omp parallel for schedule(static)
        for (int y = r.y0; y < r.y1; ++y) {
          const std::size_t i = g.index(r.x0, y);
          kern.accum_sq_weighted_diff(acc.data() + i, sw + i, a + i, b + i + shift, r.length());
        }
      }
    }
  }
  return acc;
}

std::vector<double> slice_pixel_sq(const NLField& p) {
  std::vector<double> acc(p.grid().pixels(), 0.0);
  const auto& kern = simd::kernels();
  for (int k = 0; k < p.channels(); ++k) {
    for (std::size_t j = 0; j < p.stencil_size(); ++j) kern.accum_sq(acc.data(), p.slice(k, j).data(), acc.size());
  }
  return acc;
}

std::vector<double> grad_pixel_sq(const GradField& g) {
  std::vector<double> acc(g.pixels(), 0.0);
  const auto& kern = simd::kernels();
  for (int k = 0; k < g.channels(); ++k) {
    for (int t = 0; t < 2; ++t) kern.accum_sq(acc.data(), g.plane(k, t).data(), acc.size());
  }
  return acc;
}

}  // namespace nlretinex
