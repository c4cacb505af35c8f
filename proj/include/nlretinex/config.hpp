#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlretinex/gamma.hpp"
#include "nlretinex/image_io.hpp"
#include "nlretinex/metrics.hpp"
#include "nlretinex/preprocess.hpp"
#include "nlretinex/solver.hpp"
#include "nlretinex/weights.hpp"

namespace nlretinex {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> gt_dir;
  bool dump_intermediates = false;
  int jobs = 1;
  int threads = 0;  // 0: OpenMP default
  std::uint64_t seed = 0;
  BitDepth output_depth = BitDepth::k8;

  bool color_correct = true;
  ColorCorrectionParams color;
  GuideParams guide;
  WeightParams weights;
  SolverParams solver;
  GammaParams gamma;
  SsimColor ssim_color = SsimColor::kLuma;

  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Overlays the keys present in the TOML text onto base. Unknown keys and
/// type mismatches raise ConfigError.
RunConfig parse_config(std::string_view toml_text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Complete TOML rendering of every field; parse_config(to_toml(c)) == c.
std::string to_toml(const RunConfig& config);

GradientFidelity parse_gradient_fidelity(std::string_view s);
IllumPrior parse_illum_prior(std::string_view s);
ReflPrior parse_refl_prior(std::string_view s);
SsimColor parse_ssim_color(std::string_view s);

}  // namespace nlretinex
