#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nlretinex/config.hpp"
#include "nlretinex/image_io.hpp"
#include "nlretinex/pipeline.hpp"
#include "nlretinex/preprocess.hpp"
#include "nlretinex/simd/kernels.hpp"

using namespace nlretinex;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

// Values given on the command line; unset fields leave the config untouched.
struct Overrides {
  std::optional<fs::path> config;
  std::vector<fs::path> inputs;
  std::optional<fs::path> output;
  std::optional<fs::path> gt_dir;
  bool dump = false;
  std::optional<int> jobs, threads, output_bits, max_iters, nu, kappa, nu_hat, kappa_hat;
  std::optional<std::uint64_t> seed;
  std::optional<double> vartheta, alpha, beta, lambda, mu, tau, sigma, rel_tol;
  std::optional<double> h_spt, h_sim, h_sim_hat, denoise_strength, target;
  bool no_noise = false, no_color = false;
  std::optional<std::string> gradient_fidelity, illum_prior, refl_prior, ssim_color;
  std::optional<fs::path> weights, grad_weights;
  bool quiet = false;
};

void add_run_options(CLI::App* cmd, Overrides& o, bool with_inputs) {
  cmd->add_option("--config,-c", o.config, "TOML configuration file");
  if (with_inputs) cmd->add_option("inputs", o.inputs, "input images or directories");
  cmd->add_option("--output,-o", o.output, "output directory");
  cmd->add_option("--threads", o.threads, "OpenMP threads per image (env NLRETINEX_THREADS)");
  cmd->add_option("--seed", o.seed, "seed recorded in the effective config");
  cmd->add_flag("--no-color-correct", o.no_color, "skip colour correction");
  cmd->add_option("--vartheta", o.vartheta, "colour-correction strength");
  cmd->add_option("--denoise-strength", o.denoise_strength, "guide denoiser bandwidth");
  cmd->add_option("--nu", o.nu, "search radius of the intensity weights");
  cmd->add_option("--kappa", o.kappa, "patch radius of the intensity weights");
  cmd->add_option("--h-spt", o.h_spt, "spatial bandwidth");
  cmd->add_option("--h-sim", o.h_sim, "similarity bandwidth of the intensity weights");
  cmd->add_option("--nu-hat", o.nu_hat, "search radius of the gradient weights");
  cmd->add_option("--kappa-hat", o.kappa_hat, "patch radius of the gradient weights");
  cmd->add_option("--h-sim-hat", o.h_sim_hat, "similarity bandwidth of the gradient weights");
  cmd->add_flag("--quiet,-q", o.quiet, "no per-image log");
}

void add_solver_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--gt-dir", o.gt_dir, "ground-truth directory for metrics");
  cmd->add_flag("--dump-intermediates", o.dump, "write R, L, L^gamma, N and the guides");
  cmd->add_option("--jobs,-j", o.jobs, "images processed concurrently");
  cmd->add_option("--output-bits", o.output_bits, "8 or 16");
  cmd->add_option("--alpha", o.alpha, "reflectance prior weight");
  cmd->add_option("--beta", o.beta, "illumination prior weight");
  cmd->add_option("--lambda", o.lambda, "noise penalty");
  cmd->add_option("--mu", o.mu, "gradient fidelity weight");
  cmd->add_option("--tau", o.tau, "primal step (default from the operator norm)");
  cmd->add_option("--sigma", o.sigma, "dual step (default from the operator norm)");
  cmd->add_option("--max-iters", o.max_iters, "iteration limit");
  cmd->add_option("--rel-tol", o.rel_tol, "relative change stopping tolerance");
  cmd->add_option("--gamma-target", o.target, "mean of the relit illumination");
  cmd->add_flag("--no-noise-term", o.no_noise, "drop the noise component");
  cmd->add_option("--gradient-fidelity", o.gradient_fidelity, "nonlocal, local or off")
      ->check(CLI::IsMember({"nonlocal", "local", "off"}));
  cmd->add_option("--illum-prior", o.illum_prior, "tv or tikhonov")->check(CLI::IsMember({"tv", "tikhonov"}));
  cmd->add_option("--refl-prior", o.refl_prior, "nltv or tv")->check(CLI::IsMember({"nltv", "tv"}));
  cmd->add_option("--ssim-color", o.ssim_color, "luma or channel_mean")->check(CLI::IsMember({"luma", "channel_mean"}));
  cmd->add_option("--weights", o.weights, "precomputed intensity weights (single input only)");
  cmd->add_option("--grad-weights", o.grad_weights, "precomputed gradient weights (single input only)");
}

template <class T, class U>
void set_if(const std::optional<T>& v, U& target) {
  if (v) target = static_cast<U>(*v);
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (o.config) c = load_config(*o.config);
  if (const char* env = std::getenv("NLRETINEX_THREADS"); env && *env) {
    try {
      c.threads = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("NLRETINEX_THREADS is not an integer: ") + env);
    }
  }
  if (!o.inputs.empty()) c.inputs = o.inputs;
  set_if(o.output, c.output_dir);
  if (o.gt_dir) c.gt_dir = *o.gt_dir;
  if (o.dump) c.dump_intermediates = true;
  set_if(o.jobs, c.jobs);
  set_if(o.threads, c.threads);
  set_if(o.seed, c.seed);
  if (o.output_bits) {
    if (*o.output_bits != 8 && *o.output_bits != 16) throw ConfigError("--output-bits must be 8 or 16");
    c.output_depth = *o.output_bits == 8 ? BitDepth::k8 : BitDepth::k16;
  }
  if (o.no_color) c.color_correct = false;
  set_if(o.vartheta, c.color.vartheta);
  set_if(o.denoise_strength, c.guide.denoise_strength);
  set_if(o.nu, c.weights.nu);
  set_if(o.kappa, c.weights.kappa);
  set_if(o.h_spt, c.weights.h_spt);
  set_if(o.h_sim, c.weights.h_sim);
  set_if(o.nu_hat, c.weights.nu_hat);
  set_if(o.kappa_hat, c.weights.kappa_hat);
  set_if(o.h_sim_hat, c.weights.h_sim_hat);
  set_if(o.alpha, c.solver.alpha);
  set_if(o.beta, c.solver.beta);
  set_if(o.lambda, c.solver.lambda);
  set_if(o.mu, c.solver.mu);
  if (o.tau) c.solver.tau = *o.tau;
  if (o.sigma) c.solver.sigma = *o.sigma;
  set_if(o.max_iters, c.solver.max_iters);
  set_if(o.rel_tol, c.solver.rel_tol);
  set_if(o.target, c.gamma.target);
  if (o.no_noise) c.solver.noise_term = false;
  if (o.gradient_fidelity) c.solver.gradient_fidelity = parse_gradient_fidelity(*o.gradient_fidelity);
  if (o.illum_prior) c.solver.illum_prior = parse_illum_prior(*o.illum_prior);
  if (o.refl_prior) c.solver.refl_prior = parse_refl_prior(*o.refl_prior);
  if (o.ssim_color) c.ssim_color = parse_ssim_color(*o.ssim_color);
  c.validate();
  return c;
}

void apply_threads(const RunConfig& c) {
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#else
  (void)c;
#endif
}

int run_stage(const Overrides& o, Stage stage) {
  const RunConfig c = resolve(o);
  if (c.inputs.empty()) throw ConfigError("no inputs given");
  apply_threads(c);
  PrecomputedWeights pre;
  if (o.weights) pre.intensity = load_intensity_weights(*o.weights);
  if (o.grad_weights) pre.gradient = load_gradient_weights(*o.grad_weights);
  const PipelineSummary s = run_pipeline(c, stage, pre, o.quiet ? nullptr : &std::cerr);
  if (s.failures > 0) {
    std::cerr << s.failures << " of " << s.images.size() << " images failed\n";
    return kExitPartial;
  }
  return kExitOk;
}

int run_weights_dump(const Overrides& o, const fs::path& image) {
  const RunConfig c = resolve(o);
  apply_threads(c);
  const fs::path out_dir = o.output.value_or(fs::path("."));
  fs::create_directories(out_dir);
  const ColorImage corrected = corrected_input(load_image(image), c);
  const ColorImage guide = build_guide(corrected, c.guide);
  const WeightTables t = build_weight_tables(corrected, guide, c);
  const std::string stem = image.stem().string();
  save_weights(out_dir / (stem + ".weights.nlw"), t.intensity);
  save_weights(out_dir / (stem + ".grad_weights.nlw"), t.gradient);
  if (!o.quiet) std::cerr << "wrote " << (out_dir / (stem + ".weights.nlw")).string() << " and "
                          << (out_dir / (stem + ".grad_weights.nlw")).string() << '\n';
  return kExitOk;
}

int run_metrics_cmd(const fs::path& enhanced, const fs::path& gt, const std::optional<std::string>& color,
                    const std::optional<fs::path>& csv_path) {
  SsimParams params;
  if (color) params.color = parse_ssim_color(*color);
  const MetricTable t = run_metrics(enhanced, gt, params);
  for (const auto& name : t.missing) std::cerr << "warning: no counterpart for " << name << ", skipped\n";
  if (csv_path) {
    std::ofstream f(*csv_path);
    if (!f) throw ConfigError("cannot write " + csv_path->string());
    write_metrics_csv(f, t);
  } else {
    write_metrics_csv(std::cout, t);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal Retinex low-light enhancement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nlretinex 0.1.0");
  bool show_kernels = false;
  app.add_flag("--show-kernels", show_kernels, "print the selected SIMD kernel set");

  Overrides enh, dec, wd;
  auto* enhance_cmd = app.add_subcommand("enhance", "decompose and relight");
  add_run_options(enhance_cmd, enh, true);
  add_solver_options(enhance_cmd, enh);

  auto* decompose_cmd = app.add_subcommand("decompose", "write R, L and N without relighting");
  add_run_options(decompose_cmd, dec, true);
  add_solver_options(decompose_cmd, dec);

  fs::path wd_image;
  auto* weights_cmd = app.add_subcommand("weights-dump", "build and save the weight tables for one image");
  add_run_options(weights_cmd, wd, false);
  weights_cmd->add_option("image", wd_image, "input image")->required();

  fs::path m_enhanced, m_gt;
  std::optional<std::string> m_color;
  std::optional<fs::path> m_csv;
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR/SSIM between two directories");
  metrics_cmd->add_option("enhanced", m_enhanced, "directory of enhanced images")->required();
  metrics_cmd->add_option("reference", m_gt, "directory of ground-truth images")->required();
  metrics_cmd->add_option("--ssim-color", m_color, "luma or channel_mean")->check(CLI::IsMember({"luma", "channel_mean"}));
  metrics_cmd->add_option("--csv", m_csv, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (show_kernels) std::cerr << "kernels: " << simd::kernels().name << '\n';
  try {
    if (*enhance_cmd) return run_stage(enh, Stage::kEnhance);
    if (*decompose_cmd) return run_stage(dec, Stage::kDecompose);
    if (*weights_cmd) return run_weights_dump(wd, wd_image);
    if (*metrics_cmd) return run_metrics_cmd(m_enhanced, m_gt, m_color, m_csv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitOk;
}
