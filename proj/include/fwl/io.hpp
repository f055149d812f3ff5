// Artifact files. Point sets, catalogs and grids are CSV with a one-line
// header; metadata goes to a JSON sidecar next to each CSV. Eigenvectors use
// a small binary format:
//
//   offset  size  field
//   0       8     magic "FWLEIG01"
//   8       8     int64 basis size (rows)
//   16      8     int64 number of states (cols)
//   24      4     int32 n_max
//   28      4     int32 flags (bit 0: left vectors present)
//   32      8     double hbar
//   40      8     double theta
//   48      -     eigenvalues, then right vectors, then left vectors
//
// Complex numbers are stored as (re, im) double pairs, little endian,
// vectors column after column. Rows follow the polyad-major basis order
// index(nx, ny) = N (N + 1) / 2 + ny with N = nx + ny.
#pragma once

#include "fwl/correlation.hpp"
#include "fwl/eigensolvers.hpp"
#include "fwl/husimi.hpp"
#include "fwl/repeller.hpp"
#include "fwl/resonances.hpp"
#include "fwl/weyl.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwl::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const fs::path& p) : std::runtime_error("missing artifact: " + p.string()), path(p) {}
  fs::path path;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& p);
std::string sha256_string(const std::string& s);

void write_json(const fs::path& p, const json& j);
json read_json(const fs::path& p);

// Sidecar path: foo.csv -> foo.json.
fs::path sidecar(const fs::path& csv);

json to_json(const ModelParams& p);
json to_json(const SurvivalConfig& c);
json to_json(const SosFrame& f);
json to_json(const BasisSpec& b);
json to_json(const CountingBoxes& b);
json to_json(const HusimiConfig& c);

void write_repeller(const fs::path& csv, const RepellerSet& set, const ModelParams& p);
RepellerSet read_repeller(const fs::path& csv);

/// Numeric table with a header row. Columns named y and py are picked when
/// present, otherwise every column is used.
Eigen::MatrixXd read_points(const fs::path& csv);
void write_points(const fs::path& csv, const Eigen::MatrixXd& pts, const std::vector<std::string>& names);

void write_correlation(const fs::path& csv, const CorrelationCurve& c, const json& extra = {});

void write_catalog(const fs::path& csv, const SpectrumCatalog& cat);
SpectrumCatalog read_catalog(const fs::path& csv);

/// Raw eigenvalues of one theta, with symmetry labels (spectrum cache).
void write_spectrum(const fs::path& p, const ThetaSpectrum& s);
ThetaSpectrum read_spectrum(const fs::path& p);

void write_eigenvectors(const fs::path& p, const EigenSystem& sys, const BasisSpec& basis, double theta);
struct EigenvectorFile {
  EigenSystem system;
  BasisSpec basis;
  double theta = 0.0;
};
EigenvectorFile read_eigenvectors(const fs::path& p);

struct WeylRow {
  double hbar = 0.0;
  int n_max = 0;
  BoxCount count;
};
void write_weyl(const fs::path& csv, const std::vector<WeylRow>& rows, const WeylFit& fit, const json& extra = {});

void write_husimi(const fs::path& csv, const HusimiGrid& g, const json& extra = {});

/// Manifest entry for one artifact, relative to the output directory.
json artifact_entry(const fs::path& root, const fs::path& file);

/// Files listed in a manifest whose content hash no longer matches.
std::vector<std::string> verify_manifest(const fs::path& manifest);

}  // namespace fwl::io
