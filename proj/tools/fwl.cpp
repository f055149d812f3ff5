// Command-line front end: one subcommand per pipeline stage.
// CLI11 goes first: the LAPACKE headers pulled in through Eigen define a macro `I`.
#include "CLI11.hpp"

#include "fwl/pipeline.hpp"

#include <iostream>

namespace {

struct Flags {
  std::string config;
  std::string input;
  bool dry_run = false;
};

void add_stage_flags(CLI::App& app, fwl::RunConfig& c) {
  app.add_option("--lambda", c.model.lambda, "Cubic coupling");
  app.add_option("--omega", c.model.omega, "Rotation frequency");

  app.add_option("--scaled-energy", c.classical.scaled_energy, "Classical energy in units of E_s");
  app.add_option("--tau0", c.classical.tau0, "Survival time");
  app.add_option("--stretch", c.classical.stretch, "Re-run length in units of tau0");
  app.add_option("--r-escape", c.classical.r_escape, "Escape radius");
  app.add_option("--margin", c.classical.margin, "Minimum distance of a kept crossing from start and escape");
  app.add_option("--n-samples", c.classical.n_samples, "Initial conditions on the section");
  app.add_option("--step", c.integrator.step, "Integrator step");
  app.add_option("--order", c.integrator.order, "Integrator order (even)");

  app.add_option("--fit-lo", c.dimension.fit_lo, "Lower end of the d2 fit range");
  app.add_option("--fit-hi", c.dimension.fit_hi, "Upper end of the d2 fit range");

  app.add_option("--n-max", c.quantum.n_max, "Polyad cutoff at hbar = 1");
  app.add_option("--hbar", c.quantum.hbar, "hbar of the Husimi spectrum");
  app.add_option("--theta-grid", c.quantum.theta_grid, "Rotation angles")->delimiter(',');
  app.add_option("--solver", c.quantum.solver, "dense or iterative")->check(CLI::IsMember({"dense", "iterative"}));
  app.add_option("--tolerance", c.quantum.tolerance, "Theta-trajectory tolerance in units of E_s");
  app.add_option("--max-dense", c.quantum.max_dense, "Largest dense block");

  app.add_option("--hbars", c.weyl.hbars, "hbar sweep")->delimiter(',');
  app.add_option("--gamma-cap-factor", c.weyl.boxes.gamma_cap_factor, "Width cap factor");
  app.add_flag("--absolute-gamma", c.weyl.boxes.absolute_gamma, "Cap Gamma instead of Gamma / E_s");

  app.add_option("--E0", c.husimi.E0, "Husimi reference energy in units of E_s");
  app.add_option("--n-each-side", c.husimi.n_each_side, "Resonances on each side of E0");
  app.add_option("--gamma-cut", c.husimi.gamma_cut, "Width cutoff (0: automatic)");
  app.add_option("--grid", c.husimi.grid, "Husimi mesh size per axis");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractal Weyl law pipeline for the rotating Henon-Heiles system"};
  app.require_subcommand(1);
  fwl::RunConfig cfg;
  Flags flags;
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--output-dir", cfg.output_dir, "Artifact directory");
  app.add_option("--workers", cfg.workers, "Worker threads (0: all cores)");
  app.add_option("--config", flags.config, "JSON run configuration; its values override flags")
      ->check(CLI::ExistingFile);
  app.add_flag("--dry-run", flags.dry_run, "Print the resolved configuration and exit");
  add_stage_flags(app, cfg);

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"repeller", "Sample the section and collect the classical repeller"},
      {"dimension", "Correlation dimension of the repeller (or of --input)"},
      {"spectrum", "Complex-rotation spectra and resonance catalogs over the hbar sweep"},
      {"weyl", "Box counts and the fractal Weyl exponent"},
      {"husimi", "Averaged Husimi density on the section"},
      {"all", "Every stage in order"},
      {"plot-data", "Collect plotting inputs under <output-dir>/plot"}};
  for (const auto& [name, help] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    if (name == "dimension") sub->add_option("--input", flags.input, "Point CSV to analyse")->check(CLI::ExistingFile);
  }
  app.add_option("--kernel", [&](const CLI::results_t& r) {
    cfg.husimi.kernel = fwl::kernel_from_string(r[0]);
    return true;
  }, "Husimi kernel: resolvent or literal");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!flags.config.empty()) cfg = fwl::load_config(flags.config, cfg);
    cfg.finalize();
    if (flags.dry_run) {
      std::cout << fwl::to_json(cfg).dump(2) << std::endl;
      return 0;
    }
    const std::string stage = app.get_subcommands().front()->get_name();
    std::optional<fwl::io::fs::path> input;
    if (!flags.input.empty()) input = flags.input;
    const auto summary = fwl::run_pipeline(stage, cfg, [](const std::string& s) { std::clog << s << std::endl; },
                                           input);
    std::cout << summary.dump(2) << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
