#include "fwl/pipeline.hpp"

#include "fwl/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

namespace fwl {

namespace fs = io::fs;
using io::json;

void DimensionConfig::validate() const {
  if (!(s_min > 0.0 && s_max > s_min)) throw std::invalid_argument("dimension.s_min/s_max must satisfy 0 < s_min < s_max");
  if (n_scales < 5) throw std::invalid_argument("dimension.n_scales must be >= 5");
  if (!(fit_lo > 0.0 && fit_hi > fit_lo)) throw std::invalid_argument("dimension.fit_lo/fit_hi must satisfy 0 < lo < hi");
  if (exact_limit < 2) throw std::invalid_argument("dimension.exact_limit must be >= 2");
}

int QuantumConfig::n_max_for(double hbar) const {
  if (!scale_basis) return n_max;
  return static_cast<int>(std::ceil(n_max / hbar - 1e-9));
}

void QuantumConfig::validate() const {
  if (n_max < 1) throw std::invalid_argument("quantum.n_max must be >= 1");
  if (!(hbar > 0.0)) throw std::invalid_argument("quantum.hbar must be > 0");
  if (theta_grid.size() < 3) throw std::invalid_argument("quantum.theta_grid needs at least 3 angles");
  for (const double t : theta_grid)
    if (!(t >= 0.0 && t < std::atan(1.0))) throw std::invalid_argument("quantum.theta_grid values must lie in [0, pi/4)");
  if (!std::is_sorted(theta_grid.begin(), theta_grid.end()))
    throw std::invalid_argument("quantum.theta_grid must be sorted");
  if (solver != "dense" && solver != "iterative") throw std::invalid_argument("quantum.solver must be dense or iterative");
  if (!(tolerance > 0.0)) throw std::invalid_argument("quantum.tolerance must be > 0");
  if (max_dense < 1) throw std::invalid_argument("quantum.max_dense must be >= 1");
  if (k < 1) throw std::invalid_argument("quantum.k must be >= 1");
}

void WeylConfig::validate() const {
  boxes.validate();
  if (hbars.empty()) throw std::invalid_argument("weyl.hbars must not be empty");
  for (const double h : hbars)
    if (!(h > 0.0)) throw std::invalid_argument("weyl.hbars must be > 0");
}

void RunConfig::finalize() {
  classical.seed = seed;
  classical.workers = workers;
  husimi.workers = workers;
  model.hbar = quantum.hbar;
  validate();
}

void RunConfig::validate() const {
  model.validate();
  classical.validate(model);
  integrator.validate();
  dimension.validate();
  quantum.validate();
  weyl.validate();
  husimi.validate();
  if (output_dir.empty()) throw std::invalid_argument("output_dir must not be empty");
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
}

json to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"lambda", c.model.lambda}, {"omega", c.model.omega}};
  j["classical"] = {{"scaled_energy", c.classical.scaled_energy}, {"tau0", c.classical.tau0},
                    {"stretch", c.classical.stretch},             {"r_escape", c.classical.r_escape},
                    {"margin", c.classical.margin},               {"n_samples", c.classical.n_samples},
                    {"exclude_regular", c.classical.exclude_regular}};
  j["integrator"] = {{"step", c.integrator.step}, {"tolerance", c.integrator.tolerance}, {"order", c.integrator.order}};
  j["dimension"] = {{"s_min", c.dimension.s_min},       {"s_max", c.dimension.s_max},
                    {"n_scales", c.dimension.n_scales}, {"fit_lo", c.dimension.fit_lo},
                    {"fit_hi", c.dimension.fit_hi},     {"exact_limit", c.dimension.exact_limit},
                    {"subsample_pairs", c.dimension.subsample_pairs}};
  j["quantum"] = {{"n_max", c.quantum.n_max},         {"scale_basis", c.quantum.scale_basis},
                  {"hbar", c.quantum.hbar},           {"theta_grid", c.quantum.theta_grid},
                  {"solver", c.quantum.solver},       {"tolerance", c.quantum.tolerance},
                  {"max_dense", c.quantum.max_dense}, {"use_symmetry", c.quantum.use_symmetry},
                  {"k", c.quantum.k},                 {"center", c.quantum.center},
                  {"cache", c.quantum.cache}};
  j["weyl"] = {{"center", c.weyl.boxes.center},
               {"width", c.weyl.boxes.width},
               {"gamma_cap_factor", c.weyl.boxes.gamma_cap_factor},
               {"n_boxes", c.weyl.boxes.n_boxes},
               {"offsets", c.weyl.boxes.offsets},
               {"absolute_gamma", c.weyl.boxes.absolute_gamma},
               {"hbars", c.weyl.hbars}};
  j["husimi"] = io::to_json(c.husimi);
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j;
}

namespace {

// Assigns j[key] to field when present, naming the field on type errors.
template <typename T>
void take(const json& j, const std::string& section, const char* key, T& field) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    field = it->template get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config field " + section + (section.empty() ? "" : ".") + key + " has the wrong type");
  }
}

void reject_unknown(const json& j, const std::string& section, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw std::invalid_argument("config section " + section + " must be an object");
  for (const auto& [k, v] : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* n) { return k == n; });
    if (!ok) throw std::invalid_argument("unknown config field " + section + (section.empty() ? "" : ".") + k);
  }
}

}  // namespace

void apply_json(RunConfig& c, const json& j) {
  reject_unknown(j, "", {"model", "classical", "integrator", "dimension", "quantum", "weyl", "husimi", "output_dir",
                         "seed", "workers"});
  if (j.contains("model")) {
    const json& s = j["model"];
    reject_unknown(s, "model", {"lambda", "omega"});
    take(s, "model", "lambda", c.model.lambda);
    take(s, "model", "omega", c.model.omega);
  }
  if (j.contains("classical")) {
    const json& s = j["classical"];
    reject_unknown(s, "classical",
                   {"scaled_energy", "tau0", "stretch", "r_escape", "margin", "n_samples", "exclude_regular"});
    take(s, "classical", "scaled_energy", c.classical.scaled_energy);
    take(s, "classical", "tau0", c.classical.tau0);
    take(s, "classical", "stretch", c.classical.stretch);
    take(s, "classical", "r_escape", c.classical.r_escape);
    take(s, "classical", "margin", c.classical.margin);
    take(s, "classical", "n_samples", c.classical.n_samples);
    take(s, "classical", "exclude_regular", c.classical.exclude_regular);
  }
  if (j.contains("integrator")) {
    const json& s = j["integrator"];
    reject_unknown(s, "integrator", {"step", "tolerance", "order"});
    take(s, "integrator", "step", c.integrator.step);
    take(s, "integrator", "tolerance", c.integrator.tolerance);
    take(s, "integrator", "order", c.integrator.order);
  }
  if (j.contains("dimension")) {
    const json& s = j["dimension"];
    reject_unknown(s, "dimension", {"s_min", "s_max", "n_scales", "fit_lo", "fit_hi", "exact_limit", "subsample_pairs"});
    take(s, "dimension", "s_min", c.dimension.s_min);
    take(s, "dimension", "s_max", c.dimension.s_max);
    take(s, "dimension", "n_scales", c.dimension.n_scales);
    take(s, "dimension", "fit_lo", c.dimension.fit_lo);
    take(s, "dimension", "fit_hi", c.dimension.fit_hi);
    take(s, "dimension", "exact_limit", c.dimension.exact_limit);
    take(s, "dimension", "subsample_pairs", c.dimension.subsample_pairs);
  }
  if (j.contains("quantum")) {
    const json& s = j["quantum"];
    reject_unknown(s, "quantum", {"n_max", "scale_basis", "hbar", "theta_grid", "solver", "tolerance", "max_dense",
                                  "use_symmetry", "k", "center", "cache"});
    take(s, "quantum", "n_max", c.quantum.n_max);
    take(s, "quantum", "scale_basis", c.quantum.scale_basis);
    take(s, "quantum", "hbar", c.quantum.hbar);
    take(s, "quantum", "theta_grid", c.quantum.theta_grid);
    take(s, "quantum", "solver", c.quantum.solver);
    take(s, "quantum", "tolerance", c.quantum.tolerance);
    take(s, "quantum", "max_dense", c.quantum.max_dense);
    take(s, "quantum", "use_symmetry", c.quantum.use_symmetry);
    take(s, "quantum", "k", c.quantum.k);
    take(s, "quantum", "center", c.quantum.center);
    take(s, "quantum", "cache", c.quantum.cache);
  }
  if (j.contains("weyl")) {
    const json& s = j["weyl"];
    reject_unknown(s, "weyl", {"center", "width", "gamma_cap_factor", "n_boxes", "offsets", "absolute_gamma", "hbars"});
    take(s, "weyl", "center", c.weyl.boxes.center);
    take(s, "weyl", "width", c.weyl.boxes.width);
    take(s, "weyl", "gamma_cap_factor", c.weyl.boxes.gamma_cap_factor);
    take(s, "weyl", "n_boxes", c.weyl.boxes.n_boxes);
    take(s, "weyl", "offsets", c.weyl.boxes.offsets);
    take(s, "weyl", "absolute_gamma", c.weyl.boxes.absolute_gamma);
    take(s, "weyl", "hbars", c.weyl.hbars);
  }
  if (j.contains("husimi")) {
    const json& s = j["husimi"];
    reject_unknown(s, "husimi", {"E0", "n_each_side", "gamma_cut", "grid", "theta", "kernel", "rotation"});
    take(s, "husimi", "E0", c.husimi.E0);
    take(s, "husimi", "n_each_side", c.husimi.n_each_side);
    take(s, "husimi", "gamma_cut", c.husimi.gamma_cut);
    take(s, "husimi", "grid", c.husimi.grid);
    take(s, "husimi", "theta", c.husimi.theta);
    std::string kernel = to_string(c.husimi.kernel), rotation = to_string(c.husimi.rotation);
    take(s, "husimi", "kernel", kernel);
    take(s, "husimi", "rotation", rotation);
    c.husimi.kernel = kernel_from_string(kernel);
    c.husimi.rotation = rotation_from_string(rotation);
  }
  take(j, "", "output_dir", c.output_dir);
  take(j, "", "seed", c.seed);
  take(j, "", "workers", c.workers);
}

RunConfig load_config(const fs::path& p, RunConfig base) {
  apply_json(base, io::read_json(p));
  return base;
}

std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  j.erase("workers");
  return io::sha256_string(j.dump());
}

std::string artifacts::catalog(double hbar) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "catalog_hbar_%.4f.csv", hbar);
  return buf;
}

namespace {

void say(const Logger& log, const std::string& s) {
  if (log) log(s);
}

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

ThetaSpectrum solve_angle(const RotatedHamiltonian& h, const QuantumConfig& q, const ModelParams& model) {
  ThetaSpectrum s;
  s.theta = h.theta();
  if (q.solver == "dense") {
    DenseOptions o;
    o.max_dense = q.max_dense;
    o.use_symmetry = q.use_symmetry;
    EigenSystem sys = eigensolve_dense(h, o);
    s.values = std::move(sys.values);
    s.symmetry = std::move(sys.symmetry);
  } else {
    IterativeOptions o;
    o.k = q.k;
    o.center = cplx(q.center * saddle_energy(model), 0.0);
    const IterativeResult r = eigensolve_iterative(h, o);
    std::vector<cplx> keep;
    for (Eigen::Index i = 0; i < r.values.size(); ++i)
      if (r.converged[static_cast<std::size_t>(i)]) keep.push_back(r.values[i]);
    s.values = Eigen::Map<const Eigen::VectorXcd>(keep.data(), static_cast<Eigen::Index>(keep.size()));
  }
  return s;
}

std::string spectrum_key(const ModelParams& m, const QuantumConfig& q, const BasisSpec& b, double theta) {
  json j = {{"lambda", m.lambda}, {"omega", m.omega},   {"hbar", b.hbar},         {"n_max", b.n_max},
            {"theta", theta},     {"solver", q.solver}, {"sym", q.use_symmetry}};
  if (q.solver == "iterative") {
    j["k"] = q.k;
    j["center"] = q.center;
  }
  return io::sha256_string(j.dump()).substr(0, 20);
}

}  // namespace

SpectrumCatalog compute_catalog(const ModelParams& model, const QuantumConfig& q, double hbar,
                                const std::optional<fs::path>& cache_dir, int workers, const Logger& log) {
  q.validate();
  ModelParams p = model;
  p.hbar = hbar;
  BasisSpec basis{q.n_max_for(hbar), hbar};
  basis.validate();
  const RotatedHamiltonian h0 = assemble(q.theta_grid.front(), basis, p);

  std::vector<ThetaSpectrum> spectra(q.theta_grid.size());
  parallel_for(q.theta_grid.size(), workers, [&](std::size_t i) {
    const double theta = q.theta_grid[i];
    std::optional<fs::path> file;
    if (cache_dir) file = *cache_dir / ("spectrum_" + spectrum_key(p, q, basis, theta) + ".bin");
    if (file && fs::exists(*file)) {
      spectra[i] = io::read_spectrum(*file);
      return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    spectra[i] = solve_angle(h0.rotated(theta), q, p);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    say(log, "  hbar " + fmt(hbar) + " n_max " + std::to_string(basis.n_max) + " theta " + fmt(theta) + ": " +
                 std::to_string(spectra[i].values.size()) + " eigenvalues in " + fmt(secs, 3) + " s");
    if (file) io::write_spectrum(*file, spectra[i]);
  });

  ThetaFilterOptions fo;
  fo.tolerance = q.tolerance * saddle_energy(p);
  SpectrumCatalog cat = theta_filter(spectra, fo, hbar);
  cat.basis = basis;
  cat.params = p;
  cat.solver = q.solver;
  return cat;
}

StageResult run_repeller(const RunConfig& cfg, const Logger& log) {
  const fs::path out = cfg.output_dir;
  const auto t0 = std::chrono::steady_clock::now();
  const RepellerSet set = build_repeller(cfg.classical, cfg.model, cfg.integrator);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  say(log, "repeller: " + std::to_string(set.points.size()) + " section points in " + fmt(secs, 3) + " s");
  const fs::path csv = out / artifacts::repeller;
  io::write_repeller(csv, set, cfg.model);
  StageResult r;
  r.files = {csv, io::sidecar(csv)};
  r.summary = {{"points", set.points.size()},
               {"forward_survivors", set.forward_survivors},
               {"backward_survivors", set.backward_survivors},
               {"regular_excluded", set.regular_excluded},
               {"trimmed", set.trimmed},
               {"artifact", artifacts::repeller}};
  return r;
}

StageResult run_dimension(const RunConfig& cfg, const std::optional<fs::path>& input, const Logger& log) {
  const fs::path out = cfg.output_dir;
  Eigen::MatrixXd pts;
  std::string source;
  if (input) {
    pts = io::read_points(*input);
    source = input->string();
  } else {
    const fs::path csv = out / artifacts::repeller;
    if (!fs::exists(csv)) throw io::MissingArtifact(csv);
    pts = io::read_repeller(csv).unit_points();
    source = artifacts::repeller;
  }
  if (pts.rows() < 2) throw std::invalid_argument("dimension: need at least two points");
  CorrelationOptions co;
  co.exact_limit = cfg.dimension.exact_limit;
  co.subsample_pairs = cfg.dimension.subsample_pairs;
  co.seed = cfg.seed;
  const auto scales = cfg.dimension.scales();
  CorrelationCurve curve = correlation_sum(pts, scales, co);
  fit_dimension(curve, cfg.dimension.fit_lo, cfg.dimension.fit_hi);
  say(log, "dimension: d2 = " + fmt(curve.d2, 4) + " +- " + fmt(curve.d2_err, 2) + " from " +
               std::to_string(pts.rows()) + " points");
  const fs::path csv = out / artifacts::correlation;
  io::write_correlation(csv, curve, {{"source", source}, {"points", pts.rows()}, {"m", 1.0 + curve.d2}});
  StageResult r;
  r.files = {csv, io::sidecar(csv)};
  r.summary = {{"d2", curve.d2},         {"d2_err", curve.d2_err}, {"m", 1.0 + curve.d2},
               {"points", pts.rows()},   {"source", source},       {"artifact", artifacts::correlation}};
  return r;
}

namespace {

std::vector<double> spectrum_hbars(const RunConfig& cfg) {
  std::set<double> hs(cfg.weyl.hbars.begin(), cfg.weyl.hbars.end());
  hs.insert(cfg.quantum.hbar);
  return {hs.rbegin(), hs.rend()};
}

}  // namespace

StageResult run_spectrum(const RunConfig& cfg, const Logger& log) {
  const fs::path out = cfg.output_dir;
  std::optional<fs::path> cache;
  if (cfg.quantum.cache) cache = out / "cache";
  StageResult r;
  r.summary["catalogs"] = json::array();
  for (const double hbar : spectrum_hbars(cfg)) {
    const SpectrumCatalog cat = compute_catalog(cfg.model, cfg.quantum, hbar, cache, cfg.workers, log);
    const fs::path csv = out / artifacts::catalog(hbar);
    io::write_catalog(csv, cat);
    say(log, "spectrum: hbar " + fmt(hbar) + ": " + std::to_string(cat.resonances.size()) + " resonances accepted");
    r.files.push_back(csv);
    r.files.push_back(io::sidecar(csv));
    r.summary["catalogs"].push_back({{"hbar", hbar},
                                     {"n_max", cat.basis.n_max},
                                     {"resonances", cat.resonances.size()},
                                     {"ambiguous", cat.ambiguous},
                                     {"artifact", artifacts::catalog(hbar)}});
  }
  return r;
}

StageResult run_weyl(const RunConfig& cfg, const Logger& log) {
  const fs::path out = cfg.output_dir;
  StageResult r;
  json variants = json::object();
  for (const bool absolute : {false, true}) {
    CountingBoxes boxes = cfg.weyl.boxes;
    boxes.absolute_gamma = absolute;
    std::vector<io::WeylRow> rows;
    std::vector<double> hs, ns;
    for (const double hbar : cfg.weyl.hbars) {
      const SpectrumCatalog cat = io::read_catalog(out / artifacts::catalog(hbar));
      io::WeylRow row{hbar, cat.basis.n_max, count_box(cat, boxes)};
      hs.push_back(hbar);
      ns.push_back(row.count.mean);
      rows.push_back(row);
    }
    const char* tag = absolute ? "absolute" : "scaled";
    json entry = {{"counts", ns}};
    WeylFit fit;
    try {
      fit = fit_weyl(hs, ns);
      entry["d"] = fit.d;
      entry["d_err"] = fit.d_err;
    } catch (const std::invalid_argument& e) {
      entry["error"] = e.what();
      fit.hbars = hs;
      fit.counts = ns;
    }
    const fs::path csv = out / (std::string("weyl_") + tag + ".csv");
    io::write_weyl(csv, rows, fit, {{"boxes", io::to_json(boxes)}});
    r.files.push_back(csv);
    r.files.push_back(io::sidecar(csv));
    if (absolute == cfg.weyl.boxes.absolute_gamma) {
      const fs::path main = out / artifacts::weyl;
      io::write_weyl(main, rows, fit, {{"boxes", io::to_json(boxes)}});
      r.files.push_back(main);
      r.files.push_back(io::sidecar(main));
      r.summary["d"] = entry.value("d", std::nan(""));
      r.summary["d_err"] = entry.value("d_err", std::nan(""));
      r.summary["counts"] = ns;
    }
    say(log, std::string("weyl (") + tag + " width cap): d = " + (entry.contains("d") ? fmt(fit.d, 4) : "n/a"));
    variants[tag] = entry;
  }
  r.summary["gamma_cap"] = cfg.weyl.boxes.absolute_gamma ? "absolute" : "scaled";
  r.summary["variants"] = variants;
  r.summary["artifact"] = artifacts::weyl;
  const fs::path corr = out / artifacts::correlation;
  if (fs::exists(io::sidecar(corr)) && r.summary.contains("d")) {
    const double d2 = io::read_json(io::sidecar(corr)).at("d2").get<double>();
    r.summary["classical_prediction"] = 0.5 * (1.0 + d2);
    r.summary["prediction_gap"] = std::abs(r.summary["d"].get<double>() - 0.5 * (1.0 + d2));
  }
  return r;
}

StageResult run_husimi(const RunConfig& cfg, const Logger& log) {
  const fs::path out = cfg.output_dir;
  const SpectrumCatalog cat = io::read_catalog(out / artifacts::catalog(cfg.quantum.hbar));
  const auto t0 = std::chrono::steady_clock::now();
  const HusimiStates states = prepare_states(cat, cfg.husimi);
  const double E = cfg.husimi.E0 * saddle_energy(cat.params);
  HusimiGrid grid = averaged_husimi(states.system, cat.basis, E, cfg.husimi, cat.params);
  grid.gamma_cut = states.gamma_cut;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  say(log, "husimi: " + std::to_string(states.below) + " + " + std::to_string(states.above) + " states, grid " +
               std::to_string(grid.n) + "^2 in " + fmt(secs, 3) + " s");
  if (states.below < cfg.husimi.n_each_side || states.above < cfg.husimi.n_each_side)
    say(log, "warning: fewer resonances than requested pass the width cutoff");

  StageResult r;
  r.summary = {{"states_below", states.below}, {"states_above", states.above}, {"gamma_cut", states.gamma_cut},
               {"artifact", artifacts::husimi}};
  const fs::path rep = out / artifacts::repeller;
  json extra = {{"states_below", states.below}, {"states_above", states.above}};
  std::optional<RepellerSet> set;
  if (fs::exists(rep)) {
    set = io::read_repeller(rep);
    if (std::abs(set->energy - E) > 1e-9 * E) {
      say(log, "husimi: repeller was built at another energy, overlap score skipped");
      set.reset();
    }
  }
  if (set) {
    const double score = repeller_overlap_score(grid, *set);
    const double base = uniform_baseline_score(grid, *set);
    r.summary["repeller_overlap_score"] = score;
    r.summary["uniform_baseline_score"] = base;
    r.summary["score_ratio"] = base > 0.0 ? score / base : std::nan("");
    extra["repeller_overlap_score"] = score;
    extra["uniform_baseline_score"] = base;
    say(log, "husimi: overlap score " + fmt(score, 4) + " vs uniform " + fmt(base, 4));
  } else if (!fs::exists(rep)) {
    say(log, "husimi: no repeller artifact, overlap score skipped");
  }
  const fs::path csv = out / artifacts::husimi;
  io::write_husimi(csv, grid, extra);
  const fs::path vec = out / artifacts::eigenvectors;
  io::write_eigenvectors(vec, states.system, cat.basis, cfg.husimi.theta);
  r.files = {csv, io::sidecar(csv), vec};
  return r;
}

StageResult run_plot_data(const RunConfig& cfg, const Logger& log) {
  const fs::path out = cfg.output_dir;
  const fs::path dir = out / "plot";
  StageResult r;
  const double E = cfg.classical.energy(cfg.model);
  const SosFrame frame = sos_frame(E, cfg.model);

  // Bounding curve of the section in physical and unit coordinates.
  {
    const int n = 400;
    Eigen::MatrixXd b(2 * n, 4);
    for (int i = 0; i < n; ++i) {
      const double y = frame.y_lo + (frame.y_hi - frame.y_lo) * i / (n - 1);
      const double pm = sos_py_max(y, E, cfg.model);
      for (const int s : {0, 1}) {
        const double py = s == 0 ? pm : -pm;
        const Eigen::Vector2d u = frame.to_unit(y, py);
        b.row(s == 0 ? i : 2 * n - 1 - i) << y, py, u[0], u[1];
      }
    }
    const fs::path p = dir / "boundary.csv";
    io::write_points(p, b, {"y", "py", "u", "v"});
    r.files.push_back(p);
  }
  const fs::path rep = out / artifacts::repeller;
  if (fs::exists(rep)) {
    const RepellerSet set = io::read_repeller(rep);
    const Eigen::MatrixX2d u = set.unit_points();
    Eigen::MatrixXd t(u.rows(), 3);
    t.leftCols(2) = u;
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      t(i, 2) = set.points[static_cast<std::size_t>(i)].branch == Branch::Forward ? 0.0 : 1.0;
    const fs::path p = dir / "repeller_unit.csv";
    io::write_points(p, t, {"u", "v", "branch"});
    r.files.push_back(p);
  }
  for (const char* name : {artifacts::correlation, artifacts::weyl, artifacts::husimi}) {
    const fs::path src = out / name;
    if (!fs::exists(src)) continue;
    for (const fs::path& f : {src, io::sidecar(src)}) {
      const fs::path dst = dir / f.filename();
      fs::copy_file(f, dst, fs::copy_options::overwrite_existing);
      r.files.push_back(dst);
    }
  }
  say(log, "plot-data: " + std::to_string(r.files.size()) + " files in " + dir.string());
  r.summary = {{"files", r.files.size()}, {"directory", "plot"}};
  return r;
}

namespace {

json versions() {
  return {{"fwl", "1.0.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
#if defined(__clang__)
          {"compiler", std::string("clang ") + __clang_version__}
#elif defined(__GNUC__)
          {"compiler", std::string("gcc ") + __VERSION__}
#else
          {"compiler", "unknown"}
#endif
  };
}

StageResult dispatch(const std::string& stage, const RunConfig& cfg, const Logger& log,
                     const std::optional<fs::path>& dim_input) {
  if (stage == "repeller") return run_repeller(cfg, log);
  if (stage == "dimension") return run_dimension(cfg, dim_input, log);
  if (stage == "spectrum") return run_spectrum(cfg, log);
  if (stage == "weyl") return run_weyl(cfg, log);
  if (stage == "husimi") return run_husimi(cfg, log);
  if (stage == "plot-data") return run_plot_data(cfg, log);
  throw std::invalid_argument("unknown stage '" + stage + "'");
}

}  // namespace

json run_pipeline(const std::string& stage, const RunConfig& cfg, const Logger& log,
                  const std::optional<fs::path>& dimension_input) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  const std::vector<std::string> stages =
      stage == "all" ? std::vector<std::string>{"repeller", "dimension", "spectrum", "weyl", "husimi", "plot-data"}
                     : std::vector<std::string>{stage};
  const fs::path summary_path = out / artifacts::summary;
  json summary = fs::exists(summary_path) ? io::read_json(summary_path) : json::object();
  for (const auto& s : stages) {
    const auto t0 = std::chrono::steady_clock::now();
    StageResult res = dispatch(s, cfg, log, dimension_input);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {{"stage", s},
                     {"config_hash", config_hash(cfg)},
                     {"config", to_json(cfg)},
                     {"versions", versions()},
                     {"seconds", secs},
                     {"artifacts", json::array()}};
    for (const auto& f : res.files) manifest["artifacts"].push_back(io::artifact_entry(out, f));
    const std::string mname = "manifest_" + s + ".json";
    io::write_json(out / mname, manifest);
    res.summary["manifest"] = mname;
    res.summary["seconds"] = secs;
    summary[s] = res.summary;
    io::write_json(summary_path, summary);
  }
  return summary;
}

}  // namespace fwl
