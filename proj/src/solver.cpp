#include "nlretinex/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "nlretinex/simd/kernels.hpp"

namespace nlretinex {
namespace {

bool uses_q(const SolverParams& p) { return p.gradient_fidelity != GradientFidelity::kOff; }
bool uses_o(const SolverParams& p) { return p.illum_prior == IllumPrior::kTv; }

// Projects the per-pixel slices of a stacked dual onto the ball of radius r.
template <typename Slices>
void project_slices(std::vector<double> norm2, double r, Slices&& for_each_slice) {
  const auto& kern = simd::kernels();
  std::vector<double>& factor = norm2;
  kern.ball_factor(factor.data(), norm2.data(), r, norm2.size());
  for_each_slice([&](std::span<double> slice) { kern.scale_inplace(slice.data(), factor.data(), slice.size()); });
}

double sum_sqrt(const std::vector<double>& v) {
  std::vector<double> roots(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) roots[i] = std::sqrt(v[i]);
  return pairwise_sum(roots);
}

double relative_change(std::span<const double> now, std::span<const double> before) {
  std::vector<double> d(now.size()), b(now.size());
  for (std::size_t i = 0; i < now.size(); ++i) {
    d[i] = (now[i] - before[i]) * (now[i] - before[i]);
    b[i] = before[i] * before[i];
  }
  const double num = std::sqrt(pairwise_sum(d));
  const double den = std::sqrt(pairwise_sum(b));
  return den > 0.0 ? num / den : num;
}

ScalarField channel_max(const ColorImage& img) {
  ScalarField m(img.grid(), 0.0);
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    double v = img.at(0, i);
    for (int k = 1; k < img.channels(); ++k) v = std::max(v, img.at(k, i));
    m[i] = v;
  }
  return m;
}

// Applies K^T K to (r, l) for the active terms; K^T of each forward map is
// minus the corresponding divergence.
void normal_operator(const Problem& pb, const SolverParams& params, const ColorImage& r, const ScalarField& l,
                     ColorImage& out_r, ScalarField& out_l) {
  out_r = ColorImage(r.channels(), r.grid(), 0.0);
  out_l = ScalarField(l.grid(), 0.0);
  if (params.refl_prior == ReflPrior::kNltv) {
    const ColorImage t = nl_div(nl_grad(r, pb.w), pb.w);
    for (std::size_t n = 0; n < t.size(); ++n) out_r.raw()[n] -= t.raw()[n];
  } else {
    const ColorImage t = div(grad(r));
    for (std::size_t n = 0; n < t.size(); ++n) out_r.raw()[n] -= t.raw()[n];
  }
  if (uses_q(params)) {
    const GradField g = grad(r);
    const GradField zero(g.channels(), g.grid(), 0.0);
    const ColorImage t = nlgf_adjoint(nlgf_forward(g, zero, pb.w_hat), pb.w_hat);
    for (std::size_t n = 0; n < t.size(); ++n) out_r.raw()[n] -= t.raw()[n];
  }
  if (uses_o(params)) {
    const ScalarField t = div_scalar(grad(l));
    for (std::size_t n = 0; n < t.pixels(); ++n) out_l[n] -= t[n];
  }
}

}  // namespace

const char* to_string(GradientFidelity v) {
  switch (v) {
    case GradientFidelity::kNonlocal: return "nonlocal";
    case GradientFidelity::kLocal: return "local";
    case GradientFidelity::kOff: return "off";
  }
  return "?";
}

const char* to_string(IllumPrior v) { return v == IllumPrior::kTv ? "tv" : "tikhonov"; }
const char* to_string(ReflPrior v) { return v == ReflPrior::kNltv ? "nltv" : "tv"; }

void SolverParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(alpha) || !positive(beta) || !positive(lambda)) {
    throw ContractViolation("solver: alpha, beta and lambda must be positive");
  }
  if (gradient_fidelity != GradientFidelity::kOff && !positive(mu)) {
    throw ContractViolation("solver: mu must be positive unless gradient fidelity is off");
  }
  if ((tau && !positive(*tau)) || (sigma && !positive(*sigma))) {
    throw ContractViolation("solver: step sizes must be positive");
  }
  if (tau.has_value() != sigma.has_value()) throw ContractViolation("solver: give both tau and sigma, or neither");
  if (max_iters < 0 || !(rel_tol >= 0.0) || !positive(init_eps) || power_iters < 1) {
    throw ContractViolation("solver: invalid iteration controls");
  }
}

SolverDivergence::SolverDivergence(int iteration, const std::string& what)
    : std::runtime_error("solver diverged at iteration " + std::to_string(iteration) + ": " + what),
      iteration_(iteration) {}

Problem make_problem(const ColorImage& img_tilde, const ColorImage& guide, const NLWeights& w,
                     const NLGradWeights& w_hat) {
  if (!img_tilde.same_shape(guide) || img_tilde.grid() != w.grid() || img_tilde.grid() != w_hat.grid()) {
    throw ContractViolation("solver: input, guide and weights must share one grid");
  }
  return Problem{img_tilde, grad(guide), w, w_hat, channel_max(img_tilde)};
}

DecompositionState init_state(const ColorImage& img_tilde, const NLWeights& w, const NLGradWeights& w_hat,
                              const SolverParams& params) {
  const Grid& g = img_tilde.grid();
  const int C = img_tilde.channels();
  DecompositionState s;
  s.L = channel_max(img_tilde);
  s.R = ColorImage(C, g);
  for (int k = 0; k < C; ++k) {
    for (std::size_t i = 0; i < g.pixels(); ++i) {
      s.R.at(k, i) = std::clamp(img_tilde.at(k, i) / (s.L[i] + params.init_eps), 0.0, 1.0);
    }
  }
  s.R_raw = s.R;
  s.R_bar = s.R;
  s.R_prev = s.R;
  s.L_raw = s.L;
  s.L_bar = s.L;
  s.L_prev = s.L;
  s.N = ColorImage(C, g, 0.0);
  if (params.refl_prior == ReflPrior::kNltv) {
    s.p = NLField(C, g, w.stencil_size());
  } else {
    s.p_local = GradField(C, g);
  }
  if (uses_q(params)) s.q = NLGradFidField(C, g, w_hat.stencil_size());
  s.o = GradField(1, g);
  return s;
}

double estimate_operator_norm(const Problem& pb, const SolverParams& params) {
  const Grid& g = pb.img_tilde.grid();
  std::mt19937_64 rng(params.power_seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  ColorImage r(pb.img_tilde.channels(), g);
  ScalarField l(g);
  for (double& v : r.values()) v = uni(rng);
  for (double& v : l.values()) v = uni(rng);

  auto normalize = [&](ColorImage& a, ScalarField& b) {
    const double n = std::sqrt(squared_norm(a.values()) + squared_norm(b.values()));
    if (n == 0.0) return 0.0;
    for (double& v : a.values()) v /= n;
    for (double& v : b.values()) v /= n;
    return n;
  };
  normalize(r, l);
  double eig = 0.0;
  ColorImage kr;
  ScalarField kl;
  for (int it = 0; it < params.power_iters; ++it) {
    normal_operator(pb, params, r, l, kr, kl);
    eig = normalize(kr, kl);
    r = std::move(kr);
    l = std::move(kl);
    if (eig == 0.0) break;
  }
  return std::sqrt(eig);
}

StepSizes choose_steps(const Problem& pb, const SolverParams& params) {
  if (params.tau && params.sigma) return {*params.tau, *params.sigma, 0.0};
  const double norm = estimate_operator_norm(pb, params);
  const double step = norm > 0.0 ? 0.99 / norm : 1.0;
  return {step, step, norm};
}

void dual_step_p(DecompositionState& s, const NLWeights& w, const SolverParams& params, double sigma) {
  if (params.refl_prior == ReflPrior::kNltv) {
    nl_grad_accumulate(s.p, s.R_bar, w, sigma);
    project_slices(slice_pixel_sq(s.p), params.alpha, [&](auto&& apply) {
      for (int k = 0; k < s.p.channels(); ++k) {
        for (std::size_t j = 0; j < s.p.stencil_size(); ++j) apply(s.p.slice(k, j));
      }
    });
  } else {
    const GradField g = grad(s.R_bar);
    for (std::size_t n = 0; n < g.size(); ++n) s.p_local.values()[n] += sigma * g.values()[n];
    project_slices(grad_pixel_sq(s.p_local), params.alpha, [&](auto&& apply) {
      for (int k = 0; k < s.p_local.channels(); ++k) {
        for (int t = 0; t < 2; ++t) apply(s.p_local.plane(k, t));
      }
    });
  }
}

void dual_step_q(DecompositionState& s, const GradField& guide_grad, const NLGradWeights& w_hat,
                 const SolverParams& params, double sigma) {
  if (!uses_q(params)) return;
  nlgf_accumulate_shrink(s.q, grad(s.R_bar), guide_grad, w_hat, sigma, params.mu / (params.mu + sigma));
}

void dual_step_o(DecompositionState& s, const SolverParams& params, double sigma) {
  if (!uses_o(params)) return;
  const GradField g = grad(s.L_bar);
  for (std::size_t n = 0; n < g.size(); ++n) s.o.values()[n] += sigma * g.values()[n];
  project_slices(grad_pixel_sq(s.o), params.beta, [&](auto&& apply) {
    apply(s.o.plane(0, 0));
    apply(s.o.plane(0, 1));
  });
}

void primal_step_R(DecompositionState& s, const ColorImage& img_tilde, const NLWeights& w,
                   const NLGradWeights& w_hat, const SolverParams& params, double tau) {
  const int C = s.R.channels();
  const std::size_t M = s.R.pixels();
  const ColorImage dual_p = params.refl_prior == ReflPrior::kNltv ? nl_div(s.p, w) : div(s.p_local);
  ColorImage dual_q;
  if (uses_q(params)) dual_q = nlgf_adjoint(s.q, w_hat);

  s.R_prev = s.R;
  for (int k = 0; k < C; ++k) {
    for (std::size_t i = 0; i < M; ++i) {
      const double l = s.L[i];
      double num = s.R.at(k, i) + tau * dual_p.at(k, i);
      if (uses_q(params)) num += tau * dual_q.at(k, i);
      num -= tau * l * (s.N.at(k, i) - img_tilde.at(k, i));
      const double raw = num / (1.0 + tau * l * l);
      s.R_raw.at(k, i) = raw;
      s.R.at(k, i) = std::max(0.0, std::min(raw, 1.0));
    }
  }
  for (std::size_t n = 0; n < s.R.size(); ++n) s.R_bar.raw()[n] = 2.0 * s.R.raw()[n] - s.R_prev.raw()[n];
}

void primal_step_L(DecompositionState& s, const ColorImage& img_tilde, const ScalarField& max_channel,
                   const SolverParams& params, double tau) {
  const int C = s.R.channels();
  const std::size_t M = s.L.pixels();
  ScalarField smooth(s.L.grid(), 0.0);
  double step = tau;
  if (uses_o(params)) {
    smooth = div_scalar(s.o);
  } else {
    // Explicit step on (beta/2)||grad L||^2; ||div grad|| <= 8 bounds the stable step.
    step = std::min(tau, 1.0 / (8.0 * params.beta));
    smooth = div_scalar(grad(s.L));
    for (double& v : smooth.values()) v *= params.beta;
  }

  s.L_prev = s.L;
  for (std::size_t i = 0; i < M; ++i) {
    double coupling = 0.0;
    double r2 = 0.0;
    for (int k = 0; k < C; ++k) {
      const double r = s.R.at(k, i);
      coupling += r * (s.N.at(k, i) - img_tilde.at(k, i));
      r2 += r * r;
    }
    const double raw = (s.L[i] + step * smooth[i] - step * coupling) / (1.0 + step * r2);
    s.L_raw[i] = raw;
    s.L[i] = std::max(raw, max_channel[i]);
  }
  for (std::size_t i = 0; i < M; ++i) s.L_bar[i] = 2.0 * s.L[i] - s.L_prev[i];
}

void update_N(DecompositionState& s, const ColorImage& img_tilde, const SolverParams& params) {
  if (!params.noise_term) {
    std::fill(s.N.raw().begin(), s.N.raw().end(), 0.0);
    return;
  }
  for (int k = 0; k < s.N.channels(); ++k) {
    for (std::size_t i = 0; i < s.N.pixels(); ++i) {
      s.N.at(k, i) = (img_tilde.at(k, i) - s.L[i] * s.R.at(k, i)) / (1.0 + params.lambda);
    }
  }
}

EnergyTerms energy_terms(const DecompositionState& s, const Problem& pb, const SolverParams& params) {
  EnergyTerms e;
  const std::size_t M = s.R.pixels();
  const int C = s.R.channels();

  std::vector<double> per_pixel(M, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    double acc = 0.0;
    for (int k = 0; k < C; ++k) {
      const double r = s.R.at(k, i) * s.L[i] + s.N.at(k, i) - pb.img_tilde.at(k, i);
      acc += r * r;
    }
    per_pixel[i] = acc;
  }
  e.data = 0.5 * pairwise_sum(per_pixel);

  if (params.refl_prior == ReflPrior::kNltv) {
    e.reflectance_prior = params.alpha * sum_sqrt(nl_grad_pixel_sq(s.R, pb.w));
  } else {
    e.reflectance_prior = params.alpha * sum_sqrt(grad_pixel_sq(grad(s.R)));
  }

  const std::vector<double> gl = grad_pixel_sq(grad(s.L));
  if (uses_o(params)) {
    e.illumination_prior = 0.5 * params.beta * sum_sqrt(gl);
  } else {
    e.illumination_prior = 0.5 * params.beta * pairwise_sum(gl);
  }

  if (params.noise_term) e.noise = 0.5 * params.lambda * squared_norm(s.N.values());
  if (uses_q(params)) e.fidelity = 0.5 * params.mu * pairwise_sum(nlgf_pixel_sq(grad(s.R), pb.guide_grad, pb.w_hat));
  return e;
}

double energy(const DecompositionState& s, const Problem& pb, const SolverParams& params) {
  return energy_terms(s, pb, params).total();
}

double max_dual_violation(const DecompositionState& s, const SolverParams& params) {
  double worst = 0.0;
  const std::vector<double> pn =
      params.refl_prior == ReflPrior::kNltv ? slice_pixel_sq(s.p) : grad_pixel_sq(s.p_local);
  for (double v : pn) worst = std::max(worst, std::sqrt(v) - params.alpha);
  if (uses_o(params)) {
    for (double v : grad_pixel_sq(s.o)) worst = std::max(worst, std::sqrt(v) - params.beta);
  }
  return worst;
}

double max_primal_violation(const DecompositionState& s, const ScalarField& max_channel) {
  double worst = 0.0;
  for (double v : s.R.values()) worst = std::max({worst, -v, v - 1.0});
  for (std::size_t i = 0; i < s.L.pixels(); ++i) worst = std::max(worst, max_channel[i] - s.L[i]);
  return worst;
}

Decomposition solve(const ColorImage& img_tilde, const ColorImage& guide, const NLWeights& w,
                    const NLGradWeights& w_hat, const SolverParams& params, const IterationObserver& observer) {
  params.validate();
  const NLGradWeights local = NLGradWeights::identity(img_tilde.grid());
  const NLGradWeights& fidelity_weights = params.gradient_fidelity == GradientFidelity::kLocal ? local : w_hat;
  const Problem pb = make_problem(img_tilde, guide, w, fidelity_weights);

  Diagnostics diag;
  diag.steps = choose_steps(pb, params);
  const double tau = diag.steps.tau;
  const double sigma = diag.steps.sigma;

  DecompositionState s = init_state(img_tilde, w, fidelity_weights, params);
  diag.initial_energy = energy(s, pb, params);

  for (int n = 0; n < params.max_iters; ++n) {
    dual_step_p(s, w, params, sigma);
    dual_step_q(s, pb.guide_grad, fidelity_weights, params, sigma);
    dual_step_o(s, params, sigma);
    primal_step_R(s, img_tilde, w, fidelity_weights, params, tau);
    primal_step_L(s, img_tilde, pb.max_channel, params, tau);
    update_N(s, img_tilde, params);
    s.iter = n + 1;

    if (!all_finite(s.R_raw.values()) || !all_finite(s.L_raw.values()) || !all_finite(s.N.values())) {
      throw SolverDivergence(s.iter, "non-finite primal values; step sizes too large");
    }

    IterationRecord rec;
    rec.iter = s.iter;
    rec.energy = std::numeric_limits<double>::quiet_NaN();
    rec.rel_change = std::max(relative_change(s.R.values(), s.R_prev.values()),
                              relative_change(s.L.values(), s.L_prev.values()));
    rec.max_dual_violation = max_dual_violation(s, params);
    rec.max_primal_violation = max_primal_violation(s, pb.max_channel);
    if (params.track_energy || n + 1 == params.max_iters) rec.energy = energy(s, pb, params);
    const bool done = rec.rel_change < params.rel_tol;
    if (done && !params.track_energy) rec.energy = energy(s, pb, params);
    diag.iterations.push_back(rec);
    if (observer) observer(s, rec);
    if (done) {
      diag.converged = true;
      break;
    }
  }

  return Decomposition{std::move(s.R), std::move(s.L), std::move(s.N), std::move(diag)};
}

void write_diagnostics_csv(std::ostream& out, const Diagnostics& diag) {
  out << "iter,energy,rel_change,max_dual_violation,max_primal_violation\n";
  out.precision(17);
  out << 0 << ',' << diag.initial_energy << ",,0,0\n";
  for (const auto& r : diag.iterations) {
    out << r.iter << ',' << r.energy << ',' << r.rel_change << ',' << r.max_dual_violation << ','
        << r.max_primal_violation << '\n';
  }
}

}  // namespace nlretinex
