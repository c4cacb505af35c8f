#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlretinex/config.hpp"
#include "nlretinex/gamma.hpp"
#include "nlretinex/image.hpp"
#include "nlretinex/metrics.hpp"
#include "nlretinex/solver.hpp"
#include "nlretinex/weights.hpp"

namespace nlretinex {

enum class Stage {
  kEnhance,    // full pipeline including gamma relighting
  kDecompose,  // stop after the Retinex decomposition
};

/// Everything computed for one image, in pipeline order.
struct ProcessedImage {
  ColorImage input;
  ColorImage corrected;  // color-corrected observation
  ColorImage guide;      // denoised, per-channel gamma-normalised reference
  Decomposition decomposition;
  GammaResult gamma;
  ScalarField relit_illumination;  // L^gamma
  ColorImage output;               // L^gamma R
};

/// Optional precomputed weight tables (e.g. from weights-dump).
struct PrecomputedWeights {
  std::optional<NLWeights> intensity;
  std::optional<NLGradWeights> gradient;
};

struct WeightTables {
  NLWeights intensity;
  NLGradWeights gradient;
};

/// Colour correction and guide construction, shared by every entry point.
ColorImage corrected_input(const ColorImage& input, const RunConfig& config);
WeightTables build_weight_tables(const ColorImage& corrected, const ColorImage& guide, const RunConfig& config);

ProcessedImage process_image(const ColorImage& input, const RunConfig& config, Stage stage = Stage::kEnhance,
                             const PrecomputedWeights& precomputed = {});

struct ImageResult {
  std::filesystem::path input;
  std::filesystem::path output;
  bool ok = false;
  std::string error;
  double gamma = 0.0;
  std::string gamma_status;
  int iterations = 0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  std::optional<MetricReport> metrics;
};

struct PipelineSummary {
  std::vector<ImageResult> images;
  int failures = 0;
};

/// Expands directories into their image files (sorted by name).
std::vector<std::filesystem::path> collect_inputs(const std::vector<std::filesystem::path>& inputs);

/// Processes every input, writing outputs, diagnostics, the summary and the
/// effective configuration into config.output_dir. Per-image failures are
/// recorded and do not stop the batch.
PipelineSummary run_pipeline(const RunConfig& config, Stage stage = Stage::kEnhance,
                             const PrecomputedWeights& precomputed = {}, std::ostream* log = nullptr);

void write_summary_csv(std::ostream& out, const PipelineSummary& summary);

struct MetricRow {
  std::string name;
  MetricReport report;
};

struct MetricTable {
  std::vector<MetricRow> rows;
  MetricReport mean;
  std::vector<std::string> missing;  // files without a counterpart
};

/// Compares files with matching names in the two directories.
MetricTable run_metrics(const std::filesystem::path& enhanced_dir, const std::filesystem::path& gt_dir,
                        const SsimParams& params = {});

void write_metrics_csv(std::ostream& out, const MetricTable& table);

}  // namespace nlretinex
