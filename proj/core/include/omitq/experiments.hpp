// Experiment registry, config parsing and deterministic CSV/metadata output.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "omitq/pipeline.hpp"

namespace omitq {

inline constexpr std::string_view kVersion = "0.1.0";

// Flat key = value configuration with '#' comments, strict about unknown
// keys. All frequencies in units of Ω.
struct ExperimentConfig {
  std::string experiment;
  SystemParams params;

  SidebandMethod method = SidebandMethod::LinearResponse;
  int threads = 1;
  long truncation_ceiling = 4096;
  double convergence_tol = 1e-4;
  int window_periods = 5;
  double dt = 0.0;

  // Spectrum window override (required for custom_spectrum).
  std::optional<double> grid_min, grid_max, grid_step;

  std::vector<double> ratios{1.0, 0.5, 0.25, 0.1};     // crossover sweeps
  std::vector<double> n_th_values{0.0, 0.5, 1.0, 2.0}; // temperature sweep
  double t_switch = 100.0;  // transistor ramp duration (Ω t units)
  double t_hold = 0.0;      // transistor hold; 0 selects max(10/Γ_M, 10/κ)

  static ExperimentConfig load(std::istream& in, const std::string& origin);
  static ExperimentConfig load_file(const std::filesystem::path& path);

  // Resolved key = value form; parsing it back reproduces this config.
  std::string serialize() const;

  PipelineOptions pipeline_options() const;
};

extern const std::vector<std::string> kExperimentNames;

// One row per experiment: name, reproduced figure, description.
std::string list_experiments();

struct RunOutput {
  std::vector<std::filesystem::path> files;
  double wall_seconds = 0.0;
};

// Executes the configured experiment and writes CSVs plus metadata.txt into
// out_dir. The metadata file is itself a loadable config; rerunning from it
// reproduces the CSV bodies byte for byte.
RunOutput run_experiment(const ExperimentConfig& config,
                         const std::filesystem::path& out_dir);

}  // namespace omitq
