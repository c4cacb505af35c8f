#include "nlretinex/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace nlretinex {
namespace {

// Reads one [section], remembering which keys were consumed so leftovers can
// be reported as typos.
class Section {
 public:
  Section(const toml::table& root, std::string name) : name_(std::move(name)) {
    if (const toml::node* n = root.get(name_)) {
      table_ = n->as_table();
      if (!table_) throw ConfigError("config: [" + name_ + "] must be a table");
    }
  }

  void read(const char* key, double& out) {
    if (const toml::node* n = take(key)) {
      if (auto v = n->value_exact<double>()) {
        out = *v;
      } else if (auto i = n->value_exact<std::int64_t>()) {
        out = static_cast<double>(*i);
      } else {
        bad(key, "a number");
      }
    }
  }

  void read(const char* key, int& out) {
    if (const toml::node* n = take(key)) {
      auto v = n->value_exact<std::int64_t>();
      if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) bad(key, "an integer");
      out = static_cast<int>(*v);
    }
  }

  void read(const char* key, std::uint64_t& out) {
    if (const toml::node* n = take(key)) {
      auto v = n->value_exact<std::int64_t>();
      if (!v || *v < 0) bad(key, "a non-negative integer");
      out = static_cast<std::uint64_t>(*v);
    }
  }

  void read(const char* key, bool& out) {
    if (const toml::node* n = take(key)) {
      auto v = n->value_exact<bool>();
      if (!v) bad(key, "a boolean");
      out = *v;
    }
  }

  std::optional<std::string> string(const char* key) {
    if (const toml::node* n = take(key)) {
      auto v = n->value_exact<std::string>();
      if (!v) bad(key, "a string");
      return *v;
    }
    return std::nullopt;
  }

  // number or the string "auto"
  void read_step(const char* key, std::optional<double>& out) {
    if (const toml::node* n = take(key)) {
      if (auto s = n->value_exact<std::string>()) {
        if (*s != "auto") bad(key, "a number or \"auto\"");
        out.reset();
      } else if (auto v = n->value_exact<double>()) {
        out = *v;
      } else if (auto i = n->value_exact<std::int64_t>()) {
        out = static_cast<double>(*i);
      } else {
        bad(key, "a number or \"auto\"");
      }
    }
  }

  std::optional<std::vector<std::string>> strings(const char* key) {
    const toml::node* n = take(key);
    if (!n) return std::nullopt;
    const toml::array* arr = n->as_array();
    if (!arr) bad(key, "an array of strings");
    std::vector<std::string> out;
    for (const toml::node& e : *arr) {
      auto v = e.value_exact<std::string>();
      if (!v) bad(key, "an array of strings");
      out.push_back(*v);
    }
    return out;
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      if (!seen_.count(std::string(k.str()))) {
        throw ConfigError("config: unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
      }
    }
  }

 private:
  const toml::node* take(const char* key) {
    seen_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }

  [[noreturn]] void bad(const char* key, const char* expected) const {
    throw ConfigError("config: [" + name_ + "]." + key + " must be " + expected);
  }

  std::string name_;
  const toml::table* table_ = nullptr;
  std::set<std::string> seen_;
};

template <typename Parse, typename T>
void read_enum(Section& s, const char* key, T& out, Parse parse) {
  if (auto v = s.string(key)) out = parse(*v);
}

}  // namespace

GradientFidelity parse_gradient_fidelity(std::string_view s) {
  if (s == "nonlocal") return GradientFidelity::kNonlocal;
  if (s == "local") return GradientFidelity::kLocal;
  if (s == "off") return GradientFidelity::kOff;
  throw ConfigError("gradient fidelity must be nonlocal, local or off (got '" + std::string(s) + "')");
}

IllumPrior parse_illum_prior(std::string_view s) {
  if (s == "tv") return IllumPrior::kTv;
  if (s == "tikhonov") return IllumPrior::kTikhonov;
  throw ConfigError("illumination prior must be tv or tikhonov (got '" + std::string(s) + "')");
}

ReflPrior parse_refl_prior(std::string_view s) {
  if (s == "nltv") return ReflPrior::kNltv;
  if (s == "tv") return ReflPrior::kTv;
  throw ConfigError("reflectance prior must be nltv or tv (got '" + std::string(s) + "')");
}

SsimColor parse_ssim_color(std::string_view s) {
  if (s == "luma") return SsimColor::kLuma;
  if (s == "channel_mean") return SsimColor::kChannelMean;
  throw ConfigError("ssim color mode must be luma or channel_mean (got '" + std::string(s) + "')");
}

void RunConfig::validate() const {
  try {
    color.validate();
    guide.validate();
    weights.validate();
    solver.validate();
    gamma.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
  if (threads < 0) throw ConfigError("config: threads must be >= 0");
}

RunConfig parse_config(std::string_view toml_text, RunConfig c) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  static const std::set<std::string> known = {"run", "color", "guide", "weights", "solver", "gamma", "metrics"};
  for (const auto& [k, v] : root) {
    if (!known.count(std::string(k.str()))) throw ConfigError("config: unknown section '" + std::string(k.str()) + "'");
  }

  Section run(root, "run");
  if (auto v = run.strings("inputs")) {
    c.inputs.clear();
    for (const auto& s : *v) c.inputs.emplace_back(s);
  }
  if (auto v = run.string("output")) c.output_dir = *v;
  if (auto v = run.string("gt_dir")) c.gt_dir = v->empty() ? std::nullopt : std::optional<std::filesystem::path>(*v);
  run.read("dump_intermediates", c.dump_intermediates);
  run.read("jobs", c.jobs);
  run.read("threads", c.threads);
  run.read("seed", c.seed);
  int bits = static_cast<int>(c.output_depth);
  run.read("output_bits", bits);
  if (bits != 8 && bits != 16) throw ConfigError("config: [run].output_bits must be 8 or 16");
  c.output_depth = static_cast<BitDepth>(bits);
  run.finish();

  Section color(root, "color");
  color.read("enabled", c.color_correct);
  color.read("vartheta", c.color.vartheta);
  color.finish();

  Section guide(root, "guide");
  guide.read("denoise_strength", c.guide.denoise_strength);
  guide.read("search_radius", c.guide.search_radius);
  guide.read("patch_radius", c.guide.patch_radius);
  guide.read("target_mean", c.guide.target_mean);
  guide.finish();

  Section weights(root, "weights");
  weights.read("nu", c.weights.nu);
  weights.read("kappa", c.weights.kappa);
  weights.read("h_spt", c.weights.h_spt);
  weights.read("h_sim", c.weights.h_sim);
  weights.read("nu_hat", c.weights.nu_hat);
  weights.read("kappa_hat", c.weights.kappa_hat);
  weights.read("h_sim_hat", c.weights.h_sim_hat);
  if (auto v = weights.string("source")) {
    if (*v == "color_corrected") {
      c.weights.from_denoised = false;
    } else if (*v == "denoised") {
      c.weights.from_denoised = true;
    } else {
      throw ConfigError("config: [weights].source must be color_corrected or denoised");
    }
  }
  weights.finish();

  Section solver(root, "solver");
  solver.read("alpha", c.solver.alpha);
  solver.read("beta", c.solver.beta);
  solver.read("lambda", c.solver.lambda);
  solver.read("mu", c.solver.mu);
  solver.read_step("tau", c.solver.tau);
  solver.read_step("sigma", c.solver.sigma);
  solver.read("max_iters", c.solver.max_iters);
  solver.read("rel_tol", c.solver.rel_tol);
  solver.read("init_eps", c.solver.init_eps);
  solver.read("noise_term", c.solver.noise_term);
  read_enum(solver, "gradient_fidelity", c.solver.gradient_fidelity, parse_gradient_fidelity);
  read_enum(solver, "illum_prior", c.solver.illum_prior, parse_illum_prior);
  read_enum(solver, "refl_prior", c.solver.refl_prior, parse_refl_prior);
  solver.read("power_iters", c.solver.power_iters);
  solver.read("power_seed", c.solver.power_seed);
  solver.read("track_energy", c.solver.track_energy);
  solver.finish();

  Section gamma(root, "gamma");
  gamma.read("target", c.gamma.target);
  gamma.read("gamma_init", c.gamma.gamma_init);
  gamma.read("max_newton_iters", c.gamma.max_newton_iters);
  gamma.read("tol", c.gamma.tol);
  gamma.read("gamma_min", c.gamma.gamma_min);
  gamma.read("gamma_max", c.gamma.gamma_max);
  gamma.read("l_floor", c.gamma.l_floor);
  gamma.finish();

  Section metrics(root, "metrics");
  read_enum(metrics, "ssim_color", c.ssim_color, parse_ssim_color);
  metrics.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string to_toml(const RunConfig& c) {
  toml::array inputs;
  for (const auto& p : c.inputs) inputs.push_back(p.string());

  toml::table solver{
      {"alpha", c.solver.alpha},
      {"beta", c.solver.beta},
      {"lambda", c.solver.lambda},
      {"mu", c.solver.mu},
      {"max_iters", c.solver.max_iters},
      {"rel_tol", c.solver.rel_tol},
      {"init_eps", c.solver.init_eps},
      {"noise_term", c.solver.noise_term},
      {"gradient_fidelity", to_string(c.solver.gradient_fidelity)},
      {"illum_prior", to_string(c.solver.illum_prior)},
      {"refl_prior", to_string(c.solver.refl_prior)},
      {"power_iters", c.solver.power_iters},
      {"power_seed", static_cast<std::int64_t>(c.solver.power_seed)},
      {"track_energy", c.solver.track_energy},
  };
  if (c.solver.tau) {
    solver.insert("tau", *c.solver.tau);
  } else {
    solver.insert("tau", "auto");
  }
  if (c.solver.sigma) {
    solver.insert("sigma", *c.solver.sigma);
  } else {
    solver.insert("sigma", "auto");
  }

  toml::table root{
      {"run",
       toml::table{
           {"inputs", inputs},
           {"output", c.output_dir.string()},
           {"gt_dir", c.gt_dir ? c.gt_dir->string() : std::string()},
           {"dump_intermediates", c.dump_intermediates},
           {"jobs", c.jobs},
           {"threads", c.threads},
           {"seed", static_cast<std::int64_t>(c.seed)},
           {"output_bits", static_cast<int>(c.output_depth)},
       }},
      {"color", toml::table{{"enabled", c.color_correct}, {"vartheta", c.color.vartheta}}},
      {"guide",
       toml::table{
           {"denoise_strength", c.guide.denoise_strength},
           {"search_radius", c.guide.search_radius},
           {"patch_radius", c.guide.patch_radius},
           {"target_mean", c.guide.target_mean},
       }},
      {"weights",
       toml::table{
           {"nu", c.weights.nu},
           {"kappa", c.weights.kappa},
           {"h_spt", c.weights.h_spt},
           {"h_sim", c.weights.h_sim},
           {"nu_hat", c.weights.nu_hat},
           {"kappa_hat", c.weights.kappa_hat},
           {"h_sim_hat", c.weights.h_sim_hat},
           {"source", c.weights.from_denoised ? "denoised" : "color_corrected"},
       }},
      {"solver", solver},
      {"gamma",
       toml::table{
           {"target", c.gamma.target},
           {"gamma_init", c.gamma.gamma_init},
           {"max_newton_iters", c.gamma.max_newton_iters},
           {"tol", c.gamma.tol},
           {"gamma_min", c.gamma.gamma_min},
           {"gamma_max", c.gamma.gamma_max},
           {"l_floor", c.gamma.l_floor},
       }},
      {"metrics", toml::table{{"ssim_color", c.ssim_color == SsimColor::kLuma ? "luma" : "channel_mean"}}},
  };
  std::ostringstream out;
  out << root << '\n';
  return out.str();
}

}  // namespace nlretinex
