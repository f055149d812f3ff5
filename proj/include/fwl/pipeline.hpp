// Run configuration and the stage drivers behind the command-line tool.
#pragma once

#include "fwl/io.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fwl {

struct DimensionConfig {
  double s_min = 1e-3;
  double s_max = 0.5;
  int n_scales = 40;
  double fit_lo = 0.01;
  double fit_hi = 0.1;
  std::size_t exact_limit = 50000;
  std::uint64_t subsample_pairs = 200000000;

  std::vector<double> scales() const { return log_spaced(s_min, s_max, n_scales); }
  void validate() const;
};

struct QuantumConfig {
  /// Polyad cutoff at hbar = 1.
  int n_max = 80;
  /// Use ceil(n_max / hbar) at other hbar, keeping the covered energy fixed.
  bool scale_basis = true;
  /// hbar of the spectrum feeding the Husimi stage.
  double hbar = 1.0;
  std::vector<double> theta_grid{0.10, 0.15, 0.20, 0.25, 0.30};
  /// "dense" or "iterative".
  std::string solver = "dense";
  /// Theta-trajectory acceptance, in units of the saddle energy.
  double tolerance = 1e-3;
  Eigen::Index max_dense = 6000;
  bool use_symmetry = true;
  /// Iterative solver: eigenvalue count and target (scaled energy, real).
  int k = 200;
  double center = 1.8;
  /// Reuse per-angle spectra stored under <output_dir>/cache.
  bool cache = true;

  int n_max_for(double hbar) const;
  void validate() const;
};

struct WeylConfig {
  CountingBoxes boxes;
  std::vector<double> hbars{0.90, 0.92, 0.94, 0.96, 0.98, 1.00};
  void validate() const;
};

struct RunConfig {
  ModelParams model;
  SurvivalConfig classical;
  IntegratorConfig integrator;
  DimensionConfig dimension;
  QuantumConfig quantum;
  WeylConfig weyl;
  HusimiConfig husimi;
  std::string output_dir = "fwl-out";
  std::uint64_t seed = 12345;
  int workers = 0;

  /// Pushes seed and workers into the stage configs, then validates everything.
  void finalize();
  void validate() const;
};

io::json to_json(const RunConfig& c);
/// Overrides the fields present in j; unknown keys and bad values throw
/// std::invalid_argument naming the field.
void apply_json(RunConfig& c, const io::json& j);
RunConfig load_config(const io::fs::path& p, RunConfig base = {});
std::string config_hash(const RunConfig& c);

/// Artifact names inside the output directory.
namespace artifacts {
inline const char* repeller = "repeller.csv";
inline const char* correlation = "correlation.csv";
inline const char* weyl = "weyl.csv";
inline const char* husimi = "husimi.csv";
inline const char* eigenvectors = "husimi_states.bin";
inline const char* summary = "summary.json";
std::string catalog(double hbar);
}  // namespace artifacts

using Logger = std::function<void(const std::string&)>;

/// Spectrum at one hbar from the theta grid, with optional on-disk cache.
SpectrumCatalog compute_catalog(const ModelParams& model, const QuantumConfig& q, double hbar,
                                const std::optional<io::fs::path>& cache_dir, int workers, const Logger& log = {});

struct StageResult {
  io::json summary;
  std::vector<io::fs::path> files;
};

StageResult run_repeller(const RunConfig& cfg, const Logger& log = {});
/// Reads `input` when given (any point CSV), else the stored repeller.
StageResult run_dimension(const RunConfig& cfg, const std::optional<io::fs::path>& input = {}, const Logger& log = {});
StageResult run_spectrum(const RunConfig& cfg, const Logger& log = {});
StageResult run_weyl(const RunConfig& cfg, const Logger& log = {});
StageResult run_husimi(const RunConfig& cfg, const Logger& log = {});
StageResult run_plot_data(const RunConfig& cfg, const Logger& log = {});

/// Runs a stage ("repeller", "dimension", "spectrum", "weyl", "husimi",
/// "plot-data" or "all"), writes its manifest, merges the stage summary into
/// summary.json and returns the merged summary.
io::json run_pipeline(const std::string& stage, const RunConfig& cfg, const Logger& log = {},
                      const std::optional<io::fs::path>& dimension_input = {});

}  // namespace fwl
