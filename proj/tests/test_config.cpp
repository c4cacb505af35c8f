#include <doctest.h>

#include <fstream>
#include <limits>

#include "nlretinex/config.hpp"

using namespace nlretinex;

TEST_CASE("defaults round trip through TOML") {
  const RunConfig c;
  CHECK(parse_config(to_toml(c)) == c);
}

TEST_CASE("every field round trips through TOML") {
  RunConfig c;
  c.inputs = {"a.png", "dir/b.png"};
  c.output_dir = "results";
  c.gt_dir = "gt";
  c.dump_intermediates = true;
  c.jobs = 3;
  c.threads = 2;
  c.seed = 99;
  c.output_depth = BitDepth::k16;
  c.color_correct = false;
  c.color.vartheta = 0.25;
  c.guide.denoise_strength = 0.07;
  c.guide.search_radius = 3;
  c.guide.patch_radius = 2;
  c.guide.target_mean = 0.45;
  c.weights.nu = 3;
  c.weights.kappa = 2;
  c.weights.h_spt = std::numeric_limits<double>::infinity();
  c.weights.h_sim = 0.3;
  c.weights.nu_hat = 2;
  c.weights.kappa_hat = 0;
  c.weights.h_sim_hat = 0.01;
  c.weights.from_denoised = true;
  c.solver.alpha = 0.01;
  c.solver.beta = 0.2;
  c.solver.lambda = 3.5;
  c.solver.mu = 0.123456789012345;
  c.solver.tau = 0.3;
  c.solver.sigma = 0.4;
  c.solver.max_iters = 17;
  c.solver.rel_tol = 1e-7;
  c.solver.init_eps = 1e-2;
  c.solver.noise_term = false;
  c.solver.gradient_fidelity = GradientFidelity::kLocal;
  c.solver.illum_prior = IllumPrior::kTikhonov;
  c.solver.refl_prior = ReflPrior::kTv;
  c.solver.power_iters = 7;
  c.solver.power_seed = 5;
  c.solver.track_energy = false;
  c.gamma.target = 0.4;
  c.gamma.gamma_init = 0.8;
  c.gamma.max_newton_iters = 12;
  c.gamma.tol = 1e-9;
  c.gamma.gamma_min = 0.1;
  c.gamma.gamma_max = 10.0;
  c.gamma.l_floor = 1e-3;
  c.ssim_color = SsimColor::kChannelMean;
  const RunConfig back = parse_config(to_toml(c));
  CHECK(back == c);
}

TEST_CASE("a partial file overlays the base") {
  RunConfig base;
  base.solver.alpha = 0.02;
  const RunConfig c = parse_config("[solver]\nbeta = 0.3\n", base);
  CHECK(c.solver.alpha == 0.02);
  CHECK(c.solver.beta == 0.3);
  CHECK(c.weights == base.weights);
}

TEST_CASE("steps accept auto") {
  RunConfig base;
  base.solver.tau = 0.1;
  base.solver.sigma = 0.1;
  const RunConfig c = parse_config("[solver]\ntau = \"auto\"\nsigma = \"auto\"\n", base);
  CHECK_FALSE(c.solver.tau.has_value());
  CHECK_FALSE(c.solver.sigma.has_value());
}

TEST_CASE("bad files are rejected") {
  CHECK_THROWS_AS(parse_config("[solver]\nalpah = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[solvr]\nalpha = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[solver]\nalpha = \"big\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[solver]\ngradient_fidelity = \"sideways\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\noutput_bits = 12\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[solver\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), ConfigError);
}

TEST_CASE("error messages name the offending key") {
  try {
    parse_config("[weights]\nh_simm = 1.0\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("h_simm") != std::string::npos);
  }
}

TEST_CASE("validation turns contract violations into config errors") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.solver.alpha = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.jobs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.gamma.gamma_min = 5.0;
  c.gamma.gamma_max = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("enum names parse back") {
  for (auto v : {GradientFidelity::kNonlocal, GradientFidelity::kLocal, GradientFidelity::kOff})
    CHECK(parse_gradient_fidelity(to_string(v)) == v);
  for (auto v : {IllumPrior::kTv, IllumPrior::kTikhonov}) CHECK(parse_illum_prior(to_string(v)) == v);
  for (auto v : {ReflPrior::kNltv, ReflPrior::kTv}) CHECK(parse_refl_prior(to_string(v)) == v);
}

TEST_CASE("load_config reads a file") {
  const auto path = std::filesystem::temp_directory_path() / "nlretinex_test_config.toml";
  {
    std::ofstream f(path);
    f << "[gamma]\ntarget = 0.45\n";
  }
  CHECK(load_config(path).gamma.target == 0.45);
  std::filesystem::remove(path);
}
