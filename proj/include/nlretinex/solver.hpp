#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nlretinex/image.hpp"
#include "nlretinex/operators.hpp"
#include "nlretinex/weights.hpp"

namespace nlretinex {

enum class GradientFidelity { kNonlocal, kLocal, kOff };
enum class IllumPrior { kTv, kTikhonov };
enum class ReflPrior { kNltv, kTv };

const char* to_string(GradientFidelity v);
const char* to_string(IllumPrior v);
const char* to_string(ReflPrior v);

struct SolverParams {
  double alpha = 0.05;
  double beta = 0.1;
  double lambda = 2.0;
  double mu = 0.05;
  std::optional<double> tau;    // empty: 0.99 / ||K||
  std::optional<double> sigma;  // empty: 0.99 / ||K||
  int max_iters = 200;
  double rel_tol = 1e-4;
  double init_eps = 1e-3;

  bool noise_term = true;
  GradientFidelity gradient_fidelity = GradientFidelity::kNonlocal;
  IllumPrior illum_prior = IllumPrior::kTv;
  ReflPrior refl_prior = ReflPrior::kNltv;

  int power_iters = 20;
  std::uint64_t power_seed = 12345;
  bool track_energy = true;
  friend bool operator==(const SolverParams&, const SolverParams&) = default;

  void validate() const;
};

struct StepSizes {
  double tau = 0.0;
  double sigma = 0.0;
  double op_norm = 0.0;  // power-method estimate, 0 when steps were given explicitly
};

/// Primal iterates (clamped R, L and the unclamped step outputs), their
/// extrapolations and the three dual variables.
struct DecompositionState {
  ColorImage R;        // clamped reflectance
  ColorImage R_raw;    // last unclamped R-step output
  ColorImage R_bar;    // 2 R^{n+1} - R^n
  ColorImage R_prev;   // previous clamped reflectance
  ScalarField L;
  ScalarField L_raw;
  ScalarField L_bar;
  ScalarField L_prev;
  ColorImage N;

  NLField p;           // dual of the nonlocal TV term (refl_prior = nltv)
  GradField p_local;   // dual of the local TV term (refl_prior = tv)
  NLGradFidField q;    // dual of the gradient-fidelity term
  GradField o;         // dual of the illumination TV term
  int iter = 0;
};

/// Frozen problem data shared by every step.
struct Problem {
  const ColorImage& img_tilde;
  GradField guide_grad;
  const NLWeights& w;
  const NLGradWeights& w_hat;  // identity stencil for the local fidelity variant
  ScalarField max_channel;     // max_k img_tilde
};

Problem make_problem(const ColorImage& img_tilde, const ColorImage& guide, const NLWeights& w,
                     const NLGradWeights& w_hat);

class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(int iteration, const std::string& what);
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

struct EnergyTerms {
  double data = 0.0;
  double reflectance_prior = 0.0;
  double illumination_prior = 0.0;
  double noise = 0.0;
  double fidelity = 0.0;

  double total() const { return data + reflectance_prior + illumination_prior + noise + fidelity; }
};

struct IterationRecord {
  int iter = 0;
  double energy = 0.0;
  double rel_change = 0.0;
  double max_dual_violation = 0.0;
  double max_primal_violation = 0.0;
};

struct Diagnostics {
  double initial_energy = 0.0;
  StepSizes steps;
  std::vector<IterationRecord> iterations;
  bool converged = false;
};

struct Decomposition {
  ColorImage reflectance;
  ScalarField illumination;
  ColorImage noise;
  Diagnostics diagnostics;
};

using IterationObserver = std::function<void(const DecompositionState&, const IterationRecord&)>;

DecompositionState init_state(const ColorImage& img_tilde, const NLWeights& w, const NLGradWeights& w_hat,
                              const SolverParams& params);

/// Power-method estimate of ||K|| for the stacked linear operator of the
/// active terms.
double estimate_operator_norm(const Problem& problem, const SolverParams& params);
StepSizes choose_steps(const Problem& problem, const SolverParams& params);

void dual_step_p(DecompositionState& s, const NLWeights& w, const SolverParams& params, double sigma);
void dual_step_q(DecompositionState& s, const GradField& guide_grad, const NLGradWeights& w_hat,
                 const SolverParams& params, double sigma);
void dual_step_o(DecompositionState& s, const SolverParams& params, double sigma);
void primal_step_R(DecompositionState& s, const ColorImage& img_tilde, const NLWeights& w,
                   const NLGradWeights& w_hat, const SolverParams& params, double tau);
void primal_step_L(DecompositionState& s, const ColorImage& img_tilde, const ScalarField& max_channel,
                   const SolverParams& params, double tau);
void update_N(DecompositionState& s, const ColorImage& img_tilde, const SolverParams& params);

EnergyTerms energy_terms(const DecompositionState& s, const Problem& problem, const SolverParams& params);
double energy(const DecompositionState& s, const Problem& problem, const SolverParams& params);

/// Largest amount by which a dual slice norm exceeds its ball radius.
double max_dual_violation(const DecompositionState& s, const SolverParams& params);
/// Largest violation of 0 <= R <= 1 and L >= max_k img_tilde.
double max_primal_violation(const DecompositionState& s, const ScalarField& max_channel);

Decomposition solve(const ColorImage& img_tilde, const ColorImage& guide, const NLWeights& w,
                    const NLGradWeights& w_hat, const SolverParams& params, const IterationObserver& observer = {});

void write_diagnostics_csv(std::ostream& out, const Diagnostics& diag);

}  // namespace nlretinex
