// Resonance identification from theta-trajectories. Resonance eigenvalues stay
// put as the rotation angle changes; rotated-continuum and truncation states
// move. Eigenvalues of the reference spectrum are followed to neighbouring
// angles by nearest-neighbour matching and kept when the path is short.
#pragma once

#include "fwl/hamiltonian.hpp"

#include <span>
#include <string>
#include <vector>

namespace fwl {

struct Resonance {
  /// Real part of the eigenvalue (absolute units).
  double energy = 0.0;
  /// Gamma with eigenvalue = energy - i Gamma / 2.
  double width = 0.0;
  /// Length of the theta-trajectory (sum of nearest-neighbour steps).
  double theta_stability = 0.0;
  double hbar = 1.0;
  /// l mod 3 symmetry class, or -1 when unknown.
  int symmetry = -1;

  cplx eigenvalue() const { return {energy, -0.5 * width}; }
};

struct SpectrumCatalog {
  std::vector<Resonance> resonances;
  BasisSpec basis;
  ModelParams params;
  std::vector<double> theta_grid;
  std::string solver = "dense";
  double tolerance = 0.0;
  /// Angle whose eigenvalues are reported.
  double reference_theta = 0.0;
  std::size_t ambiguous = 0;
  std::size_t positive_imaginary = 0;
};

/// One spectrum per grid angle; `symmetry` (optional) labels the eigenvalues of
/// each spectrum by l mod 3 class and restricts matching to the same class.
struct ThetaSpectrum {
  double theta = 0.0;
  Eigen::VectorXcd values;
  std::vector<int> symmetry;
};

struct ThetaFilterOptions {
  /// Accept when the trajectory length is below this (absolute energy units).
  double tolerance = 0.0;
  /// Two candidates closer than this at any step make the match ambiguous;
  /// defaults to the tolerance when zero.
  double match_radius = 0.0;
  /// Eigenvalues with Im E above this are treated as numerical artifacts.
  double imag_tolerance = 1e-10;
};

/// Matches the spectrum at the middle grid angle across the grid. Needs >= 3 angles.
SpectrumCatalog theta_filter(std::span<const ThetaSpectrum> spectra, const ThetaFilterOptions& opts, double hbar);

}  // namespace fwl
