#include "doctest.h"

#include "fwl/pipeline.hpp"
#include "support.hpp"

#include <cmath>
#include <fstream>

using namespace fwl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("fwl_pipeline_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// A run small enough for a unit test.
RunConfig tiny(const fs::path& out) {
  RunConfig c;
  c.output_dir = out.string();
  c.classical.n_samples = 1500;
  c.classical.tau0 = 8.0;
  c.classical.stretch = 5.0;
  c.classical.margin = 2.0;
  c.quantum.n_max = 14;
  c.weyl.hbars = {0.9, 0.95, 1.0, 1.05};
  c.weyl.boxes.center = 0.5;
  c.husimi.E0 = 0.5;
  c.husimi.n_each_side = 3;
  c.husimi.grid = 16;
  c.workers = 1;
  c.finalize();
  return c;
}

}  // namespace

TEST_CASE("config JSON round trip preserves the hash") {
  RunConfig a;
  a.seed = 77;
  a.quantum.theta_grid = {0.1, 0.2, 0.3};
  a.husimi.kernel = HusimiKernel::Literal;
  RunConfig b;
  apply_json(b, to_json(a));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(b.husimi.kernel == HusimiKernel::Literal);
  CHECK(b.quantum.theta_grid == a.quantum.theta_grid);

  RunConfig c = a;
  c.output_dir = "elsewhere";
  c.workers = 3;
  CHECK(config_hash(a) == config_hash(c));
  c.seed = 78;
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("config errors name the field") {
  RunConfig c;
  CHECK_THROWS_WITH_AS(apply_json(c, io::json::parse(R"({"classical": {"tau": 3}})")),
                       doctest::Contains("classical.tau"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(apply_json(c, io::json::parse(R"({"quantum": {"n_max": "big"}})")),
                       doctest::Contains("quantum.n_max"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(apply_json(c, io::json::parse(R"({"colour": 1})")), doctest::Contains("colour"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(apply_json(c, io::json::parse(R"({"husimi": {"kernel": "other"}})")),
                       doctest::Contains("husimi.kernel"), std::invalid_argument);
  c = {};
  c.quantum.theta_grid = {0.3, 0.2, 0.1};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("theta_grid"), std::invalid_argument);
  c = {};
  c.weyl.hbars = {};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("weyl.hbars"), std::invalid_argument);
}

TEST_CASE("config file values override the base configuration") {
  TempDir d("config");
  io::write_json(d.path / "c.json", {{"seed", 5}, {"classical", {{"tau0", 12.0}}}});
  RunConfig base;
  base.seed = 1;
  base.classical.n_samples = 999;
  const RunConfig c = load_config(d.path / "c.json", base);
  CHECK(c.seed == 5);
  CHECK(c.classical.tau0 == 12.0);
  CHECK(c.classical.n_samples == 999);
  RunConfig f = c;
  f.finalize();
  CHECK(f.classical.seed == 5);
  CHECK(f.model.hbar == f.quantum.hbar);
}

TEST_CASE("catalog names") { CHECK(artifacts::catalog(0.92) == "catalog_hbar_0.9200.csv"); }

TEST_CASE("dimension stage on an external point file") {
  TempDir d("dimension");
  io::write_points(d.path / "cantor.csv", testing::cantor_points(13), {"x"});
  RunConfig c;
  c.output_dir = (d.path / "out").string();
  c.dimension.s_min = std::pow(3.0, -10);
  c.dimension.s_max = 1.0;
  c.dimension.fit_lo = std::pow(3.0, -9);
  c.dimension.fit_hi = std::pow(3.0, -3);
  c.finalize();
  const auto summary = run_pipeline("dimension", c, {}, d.path / "cantor.csv");
  CHECK(std::abs(summary["dimension"]["d2"].get<double>() - 0.6309) < 0.03);
  CHECK(fs::exists(d.path / "out" / "correlation.csv"));
  CHECK(io::verify_manifest(d.path / "out" / "manifest_dimension.json").empty());
}

TEST_CASE("weyl stage on synthetic catalogs recovers the exponent") {
  TempDir d("weyl");
  RunConfig c;
  c.output_dir = d.path.string();
  c.weyl.boxes.n_boxes = 1;
  c.finalize();
  const double es = saddle_energy(c.model);
  for (double h : c.weyl.hbars) {
    SpectrumCatalog cat;
    cat.basis = {80, h};
    cat.theta_grid = c.quantum.theta_grid;
    cat.reference_theta = 0.2;
    const auto n = static_cast<int>(std::lround(20000.0 * std::pow(h, -1.5)));
    for (int k = 0; k < n; ++k) cat.resonances.push_back({(1.4 + 0.8 * (k + 0.5) / n) * es, 0.0, 0.0, h, 0});
    io::write_catalog(d.path / artifacts::catalog(h), cat);
  }
  io::write_json(d.path / "correlation.json", {{"d2", 1.44}});
  const auto s = run_pipeline("weyl", c)["weyl"];
  CHECK(std::abs(s["d"].get<double>() - 1.5) < 1e-3);
  CHECK(s["classical_prediction"].get<double>() == doctest::Approx(1.22));
  CHECK(s["variants"].contains("absolute"));
  CHECK(fs::exists(d.path / "weyl_scaled.csv"));
}

TEST_CASE("missing inputs are reported by path") {
  TempDir d("missing");
  RunConfig c;
  c.output_dir = d.path.string();
  c.finalize();
  CHECK_THROWS_AS(run_pipeline("weyl", c), io::MissingArtifact);
  CHECK_THROWS_AS(run_pipeline("dimension", c), io::MissingArtifact);
  CHECK_THROWS_AS(run_pipeline("husimi", c), io::MissingArtifact);
  CHECK_THROWS_AS(run_pipeline("nonsense", c), std::invalid_argument);
}

TEST_CASE("all stages end to end on a tiny run, deterministically") {
  TempDir d("all");
  const RunConfig c = tiny(d.path / "a");
  const auto s = run_pipeline("all", c);
  for (const char* stage : {"repeller", "dimension", "spectrum", "weyl", "husimi", "plot-data"}) {
    CHECK(s.contains(stage));
    CHECK(io::verify_manifest(d.path / "a" / ("manifest_" + std::string(stage) + ".json")).empty());
  }
  CHECK(s["repeller"]["points"].get<int>() > 0);
  // The Husimi energy differs from the repeller's, so no score.
  CHECK_FALSE(s["husimi"].contains("repeller_overlap_score"));
  for (const char* f : {"repeller.csv", "correlation.csv", "weyl.csv", "husimi.csv", "husimi_states.bin",
                        "summary.json", "plot/boundary.csv", "plot/repeller_unit.csv", "plot/husimi.csv"})
    CHECK_MESSAGE(fs::exists(d.path / "a" / f), f);
  const auto vec = io::read_eigenvectors(d.path / "a" / "husimi_states.bin");
  CHECK(vec.system.values.size() == s["husimi"]["states_below"].get<int>() + s["husimi"]["states_above"].get<int>());

  // Same seed, same repeller; the spectrum comes from the cache.
  const RunConfig c2 = tiny(d.path / "b");
  run_pipeline("repeller", c2);
  CHECK(io::sha256_file(d.path / "a" / "repeller.csv") == io::sha256_file(d.path / "b" / "repeller.csv"));
}
