#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace oracle {

ColorImage random_image(std::mt19937_64& rng, int channels, Grid grid, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  ColorImage img(channels, grid);
  for (double& v : img.values()) v = d(rng);
  return img;
}

ScalarField random_scalar(std::mt19937_64& rng, Grid grid, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  ScalarField f(grid);
  for (double& v : f.values()) v = d(rng);
  return f;
}

GradField random_grad(std::mt19937_64& rng, int channels, Grid grid) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  GradField g(channels, grid);
  for (int k = 0; k < channels; ++k) {
    for (int t = 0; t < 2; ++t) {
      for (double& v : g.plane(k, t)) v = d(rng);
    }
  }
  return g;
}

NLField random_nlfield(std::mt19937_64& rng, int channels, Grid grid, std::size_t stencil) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  NLField p(channels, grid, stencil);
  for (double& v : p.values()) v = d(rng);
  return p;
}

NLGradFidField random_nlgf(std::mt19937_64& rng, int channels, Grid grid, std::size_t stencil) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  NLGradFidField q(channels, grid, stencil);
  for (double& v : q.values()) v = d(rng);
  return q;
}

NLWeights random_weights(std::mt19937_64& rng, Grid grid, int nu) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  NLWeights w(grid, nu);
  for (std::size_t j = 0; j < w.stencil_size(); ++j) {
    for (double& v : w.weights(j)) v = d(rng);
  }
  w.finalize();
  return w;
}

NLGradWeights random_grad_weights(std::mt19937_64& rng, Grid grid, int nu) {
  return {{random_weights(rng, grid, nu), random_weights(rng, grid, nu)}};
}

int mirror(int x, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  int m = ((x % period) + period) % period;
  return m < n ? m : period - 1 - m;
}

NLWeights weights(const std::vector<std::vector<double>>& planes, Grid grid, int nu, int kappa, double h_spt,
                  double h_sim, bool unit_self) {
  NLWeights w(grid, nu);
  const int side = 2 * nu + 1;
  const std::size_t K = static_cast<std::size_t>(side) * side;
  const std::size_t c = K / 2;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      std::vector<double> raw(K, 0.0);
      double best = 0.0;
      bool any = false;
      for (int dy = -nu; dy <= nu; ++dy) {
        for (int dx = -nu; dx <= nu; ++dx) {
          const std::size_t j = static_cast<std::size_t>((dy + nu) * side + (dx + nu));
          if (j == c) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= grid.width || ny >= grid.height) continue;
          double d = 0.0;
          for (int zy = -kappa; zy <= kappa; ++zy) {
            for (int zx = -kappa; zx <= kappa; ++zx) {
              const int a = mirror(y + zy, grid.height) * grid.width + mirror(x + zx, grid.width);
              const int b = mirror(ny + zy, grid.height) * grid.width + mirror(nx + zx, grid.width);
              for (const auto& pl : planes) {
                const double diff = pl[a] - pl[b];
                d += diff * diff;
              }
            }
          }
          const double s = static_cast<double>(dx * dx + dy * dy);
          raw[j] = std::exp(-s / (h_spt * h_spt) - d / (h_sim * h_sim));
          if (raw[j] > best) best = raw[j];
          any = true;
        }
      }
      raw[c] = (unit_self || !any || best == 0.0) ? 1.0 : best;
      double total = 0.0;
      for (double r : raw) total += r;
      const std::size_t i = static_cast<std::size_t>(y) * grid.width + x;
      w.normalizer()[i] = total;
      for (std::size_t j = 0; j < K; ++j) w.weights(j)[i] = raw[j] / total;
    }
  }
  w.finalize();
  return w;
}

NLWeights intensity_weights(const ColorImage& img, const WeightParams& p) {
  std::vector<std::vector<double>> planes;
  for (int k = 0; k < img.channels(); ++k) planes.emplace_back(img.channel(k).begin(), img.channel(k).end());
  return weights(planes, img.grid(), p.nu, p.kappa, p.h_spt, p.h_sim, false);
}

NLGradWeights gradient_weights(const GradField& g, const WeightParams& p) {
  NLGradWeights out;
  for (int t = 0; t < 2; ++t) {
    std::vector<std::vector<double>> planes;
    for (int k = 0; k < g.channels(); ++k) planes.emplace_back(g.plane(k, t).begin(), g.plane(k, t).end());
    out.direction[t] =
        weights(planes, g.grid(), p.nu_hat, p.kappa_hat, std::numeric_limits<double>::infinity(), p.h_sim_hat, false);
  }
  return out;
}

GradField grad(const ColorImage& u) {
  const Grid& g = u.grid();
  GradField out(u.channels(), g);
  for (int k = 0; k < u.channels(); ++k) {
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        const std::size_t i = g.index(x, y);
        out.plane(k, 0)[i] = x + 1 < g.width ? u.at(k, g.index(x + 1, y)) - u.at(k, i) : 0.0;
        out.plane(k, 1)[i] = y + 1 < g.height ? u.at(k, g.index(x, y + 1)) - u.at(k, i) : 0.0;
      }
    }
  }
  return out;
}

NLField nl_grad(const ColorImage& u, const NLWeights& w) {
  const Grid& g = u.grid();
  NLField out(u.channels(), g, w.stencil_size());
  for (int k = 0; k < u.channels(); ++k) {
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        const std::size_t i = g.index(x, y);
        for (std::size_t j = 0; j < w.stencil_size(); ++j) {
          const int nx = x + w.offsets()[j].dx, ny = y + w.offsets()[j].dy;
          if (nx < 0 || ny < 0 || nx >= g.width || ny >= g.height) continue;
          out.at(k, i, j) = std::sqrt(w.weight(i, j)) * (u.at(k, i) - u.at(k, g.index(nx, ny)));
        }
      }
    }
  }
  return out;
}

ColorImage nl_div(const NLField& p, const NLWeights& w) {
  const Grid& g = p.grid();
  ColorImage out(p.channels(), g);
  for (int k = 0; k < p.channels(); ++k) {
    for (int y = 0; y < g.height; ++y) {
      for (int x = 0; x < g.width; ++x) {
        const std::size_t i = g.index(x, y);
        for (std::size_t j = 0; j < w.stencil_size(); ++j) {
          const int nx = x + w.offsets()[j].dx, ny = y + w.offsets()[j].dy;
          if (nx < 0 || ny < 0 || nx >= g.width || ny >= g.height) continue;
          const double v = std::sqrt(w.weight(i, j)) * p.at(k, i, j);
          out.at(k, i) -= v;
          out.at(k, g.index(nx, ny)) += v;
        }
      }
    }
  }
  return out;
}

NLGradFidField nlgf_forward(const GradField& gr, const GradField& gg, const NLGradWeights& w) {
  const Grid& g = gr.grid();
  NLGradFidField out(gr.channels(), g, w.stencil_size());
  for (int k = 0; k < gr.channels(); ++k) {
    for (int t = 0; t < 2; ++t) {
      const NLWeights& wt = w.direction[t];
      for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
          const std::size_t i = g.index(x, y);
          for (std::size_t j = 0; j < wt.stencil_size(); ++j) {
            const int nx = x + wt.offsets()[j].dx, ny = y + wt.offsets()[j].dy;
            if (nx < 0 || ny < 0 || nx >= g.width || ny >= g.height) continue;
            out.at(k, i, j, t) =
                std::sqrt(wt.weight(i, j)) * (gr.plane(k, t)[i] - gg.plane(k, t)[g.index(nx, ny)]);
          }
        }
      }
    }
  }
  return out;
}

double inner(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t n = 0; n < a.size(); ++n) s += static_cast<long double>(a[n]) * b[n];
  return static_cast<double>(s);
}

double ssim_window(std::span<const double> a, std::span<const double> b, Grid grid, int x0, int y0,
                   const SsimParams& params) {
  const int n = params.window;
  const double r = (n - 1) / 2.0;
  std::vector<double> g(static_cast<std::size_t>(n) * n);
  double total = 0.0;
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      const double e = std::exp(-((u - r) * (u - r) + (v - r) * (v - r)) / (2.0 * params.sigma * params.sigma));
      g[v * n + u] = e;
      total += e;
    }
  }
  for (double& e : g) e /= total;
  double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      const std::size_t i = grid.index(x0 + u, y0 + v);
      const double wgt = g[v * n + u];
      ma += wgt * a[i];
      mb += wgt * b[i];
      saa += wgt * a[i] * a[i];
      sbb += wgt * b[i] * b[i];
      sab += wgt * a[i] * b[i];
    }
  }
  const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
  const double c1 = (params.k1 * params.peak) * (params.k1 * params.peak);
  const double c2 = (params.k2 * params.peak) * (params.k2 * params.peak);
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

double bisect_gamma(std::span<const double> l, double target, double floor, double lo, double hi, double tol) {
  auto f = [&](double gm) {
    long double s = 0.0L;
    for (double v : l) s += std::pow(std::max(v, floor), gm);
    return static_cast<double>(s / l.size()) - target;
  };
  // mean(L^g) is decreasing in g for L < 1
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
