#include "nlretinex/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nlretinex/image_io.hpp"
#include "nlretinex/preprocess.hpp"

namespace nlretinex {
namespace {

namespace fs = std::filesystem;

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

ColorImage as_image(const ScalarField& f) { return ColorImage(1, f.grid(), f.raw()); }

void write_intermediates(const ProcessedImage& r, const fs::path& dir, const std::string& stem, Stage stage) {
  constexpr BitDepth kDepth = BitDepth::k16;
  save_image(r.corrected, dir / (stem + "_Itilde.png"), kDepth);
  save_image(r.guide, dir / (stem + "_Ihat.png"), kDepth);
  save_image(r.decomposition.reflectance, dir / (stem + "_R.png"), kDepth);
  save_image(clamped(as_image(r.decomposition.illumination)), dir / (stem + "_L.png"), kDepth);
  // noise is signed; stored with a +0.5 offset
  ColorImage noise = r.decomposition.noise;
  for (double& v : noise.values()) v += 0.5;
  save_image(clamped(std::move(noise)), dir / (stem + "_N.png"), kDepth);
  if (stage == Stage::kEnhance) {
    save_image(clamped(as_image(r.relit_illumination)), dir / (stem + "_Lgamma.png"), kDepth);
  }
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

}  // namespace

ColorImage corrected_input(const ColorImage& input, const RunConfig& config) {
  return config.color_correct ? color_correct(input, config.color) : input;
}

WeightTables build_weight_tables(const ColorImage& corrected, const ColorImage& guide, const RunConfig& config) {
  NLWeights w = config.weights.from_denoised
                    ? build_intensity_weights(denoise(corrected, config.guide), config.weights)
                    : build_intensity_weights(corrected, config.weights);
  return {std::move(w), build_gradient_weights(grad(guide), config.weights)};
}

ProcessedImage process_image(const ColorImage& input, const RunConfig& config, Stage stage,
                             const PrecomputedWeights& precomputed) {
  ProcessedImage r;
  r.input = input;
  r.corrected = corrected_input(input, config);
  r.guide = build_guide_with_gammas(r.corrected, config.guide, config.gamma).image;

  std::optional<WeightTables> tables;
  if (!precomputed.intensity || !precomputed.gradient) tables = build_weight_tables(r.corrected, r.guide, config);
  const NLWeights& w = precomputed.intensity ? *precomputed.intensity : tables->intensity;
  const NLGradWeights& w_hat = precomputed.gradient ? *precomputed.gradient : tables->gradient;
  if (w.grid() != input.grid() || w_hat.grid() != input.grid()) {
    throw ContractViolation("precomputed weights were built for a different image size");
  }

  r.decomposition = solve(r.corrected, r.guide, w, w_hat, config.solver);
  if (stage == Stage::kEnhance) {
    r.gamma = auto_gamma(r.decomposition.illumination, config.gamma);
    ScalarField floored = r.decomposition.illumination;
    for (double& v : floored.values()) v = std::max(v, config.gamma.l_floor);
    r.relit_illumination = power(floored, r.gamma.gamma);
    r.output = enhance(r.decomposition.reflectance, floored, r.gamma.gamma);
  }
  return r;
}

std::vector<fs::path> collect_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && is_image_file(e.path())) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

PipelineSummary run_pipeline(const RunConfig& config, Stage stage, const PrecomputedWeights& precomputed,
                             std::ostream* log) {
  config.validate();
  const auto inputs = collect_inputs(config.inputs);
  if (inputs.empty()) throw ConfigError("no input images");
  if ((precomputed.intensity || precomputed.gradient) && inputs.size() != 1) {
    throw ConfigError("precomputed weights require exactly one input image");
  }
  fs::create_directories(config.output_dir);
  {
    std::ofstream eff(config.output_dir / "effective_config.toml");
    eff << to_toml(config);
  }

  PipelineSummary summary;
  summary.images.resize(inputs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&](bool single_threaded_pixels) {
#ifdef _OPENMP
    if (single_threaded_pixels) omp_set_num_threads(1);
#else
    (void)single_threaded_pixels;
#endif
    for (std::size_t n = next++; n < inputs.size(); n = next++) {
      ImageResult& res = summary.images[n];
      res.input = inputs[n];
      const std::string stem = inputs[n].stem().string();
      try {
        const ColorImage input = load_image(inputs[n]);
        const ProcessedImage r = process_image(input, config, stage, precomputed);
        const Diagnostics& d = r.decomposition.diagnostics;
        res.iterations = static_cast<int>(d.iterations.size());
        res.initial_energy = d.initial_energy;
        res.final_energy = d.iterations.empty() ? d.initial_energy : d.iterations.back().energy;
        {
          std::ofstream csv(config.output_dir / (stem + "_diagnostics.csv"));
          write_diagnostics_csv(csv, d);
        }
        if (config.dump_intermediates) write_intermediates(r, config.output_dir, stem, stage);
        if (stage == Stage::kEnhance) {
          res.gamma = r.gamma.gamma;
          res.gamma_status = to_string(r.gamma.status);
          res.output = config.output_dir / (stem + ".png");
          save_image(r.output, res.output, config.output_depth);
          if (config.gt_dir) {
            const fs::path gt = *config.gt_dir / inputs[n].filename();
            if (fs::exists(gt)) {
              SsimParams sp;
              sp.color = config.ssim_color;
              res.metrics = evaluate(load_image(res.output), load_image(gt), sp);
            }
          }
        } else {
          res.output = config.output_dir / (stem + "_R.png");
          save_image(r.decomposition.reflectance, res.output, BitDepth::k16);
          save_image(clamped(as_image(r.decomposition.illumination)), config.output_dir / (stem + "_L.png"),
                     BitDepth::k16);
          ColorImage noise = r.decomposition.noise;
          for (double& v : noise.values()) v += 0.5;
          save_image(clamped(std::move(noise)), config.output_dir / (stem + "_N.png"), BitDepth::k16);
        }
        res.ok = true;
      } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(inputs.size())));
  if (jobs == 1) {
    worker(false);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker, true);
  }

  for (const auto& r : summary.images) {
    if (!r.ok) ++summary.failures;
    if (log) {
      if (r.ok) {
        *log << r.input.filename().string() << ": ";
        if (stage == Stage::kEnhance) *log << "gamma=" << format_double(r.gamma) << " (" << r.gamma_status << ") ";
        *log << "iterations=" << r.iterations << " energy=" << format_double(r.initial_energy) << " -> "
             << format_double(r.final_energy);
        if (r.metrics) *log << " psnr=" << format_double(r.metrics->psnr_db) << " ssim=" << format_double(r.metrics->ssim);
        *log << '\n';
      } else {
        *log << r.input.string() << ": FAILED: " << r.error << '\n';
      }
    }
  }

  {
    std::ofstream csv(config.output_dir / "summary.csv");
    write_summary_csv(csv, summary);
  }
  if (config.gt_dir && stage == Stage::kEnhance) {
    std::ofstream csv(config.output_dir / "metrics.csv");
    csv << "path,psnr_db,ssim\n";
    csv.precision(10);
    for (const auto& r : summary.images) {
      if (r.metrics) csv << r.input.string() << ',' << r.metrics->psnr_db << ',' << r.metrics->ssim << '\n';
    }
  }
  return summary;
}

void write_summary_csv(std::ostream& out, const PipelineSummary& summary) {
  out << "path,status,gamma,gamma_status,iterations,initial_energy,final_energy,psnr_db,ssim,error\n";
  out.precision(10);
  for (const auto& r : summary.images) {
    out << r.input.string() << ',' << (r.ok ? "ok" : "failed") << ',';
    if (r.ok && !r.gamma_status.empty()) out << r.gamma;
    out << ',' << r.gamma_status << ',' << r.iterations << ',' << r.initial_energy << ',' << r.final_energy << ',';
    if (r.metrics) out << r.metrics->psnr_db << ',' << r.metrics->ssim;
    else out << ',';
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << ',' << err << '\n';
  }
}

MetricTable run_metrics(const fs::path& enhanced_dir, const fs::path& gt_dir, const SsimParams& params) {
  if (!fs::is_directory(enhanced_dir)) throw ConfigError("metrics: not a directory: " + enhanced_dir.string());
  if (!fs::is_directory(gt_dir)) throw ConfigError("metrics: not a directory: " + gt_dir.string());

  std::map<std::string, fs::path> enhanced, reference;
  for (const auto& e : fs::directory_iterator(enhanced_dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) enhanced[e.path().filename().string()] = e.path();
  }
  for (const auto& e : fs::directory_iterator(gt_dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) reference[e.path().filename().string()] = e.path();
  }

  MetricTable table;
  for (const auto& [name, path] : enhanced) {
    auto it = reference.find(name);
    if (it == reference.end()) {
      table.missing.push_back(name);
      continue;
    }
    table.rows.push_back({name, evaluate(load_image(path), load_image(it->second), params)});
  }
  for (const auto& [name, path] : reference) {
    if (!enhanced.count(name)) table.missing.push_back(name);
  }
  if (table.rows.empty()) {
    throw ConfigError("metrics: no matching filenames between " + enhanced_dir.string() + " and " + gt_dir.string());
  }
  double psnr_total = 0.0, ssim_total = 0.0;
  for (const auto& r : table.rows) {
    psnr_total += r.report.psnr_db;
    ssim_total += r.report.ssim;
  }
  const double n = static_cast<double>(table.rows.size());
  table.mean = {psnr_total / n, ssim_total / n};
  return table;
}

void write_metrics_csv(std::ostream& out, const MetricTable& table) {
  out << "path,psnr_db,ssim\n";
  out.precision(10);
  for (const auto& r : table.rows) out << r.name << ',' << r.report.psnr_db << ',' << r.report.ssim << '\n';
  out << "mean," << table.mean.psnr_db << ',' << table.mean.ssim << '\n';
}

}  // namespace nlretinex
