// Energy-averaged Husimi density of resonance states on the x = 0 section.
//
// Each mesh point (y, py) of the section is lifted to a phase-space point
// Omega = (0, y, px, py) at the reference energy, and the coherent state
// |Omega> is projected onto the selected resonances:
//
//   Q(Omega) = (1/pi) Im sum_i K_i(Omega) / (E_i - E)
//
// The default kernel is K_i = <Omega|R_i> (L_i^T |Omega>) with L_i^T R_i = 1,
// which is the spectral resolvent of the rotated Hamiltonian. The literal
// kernel uses the left vector in both factors, K_i = (R_i^T R_i)
// (L_i^T |Omega>)(L_i^T |conj Omega>). Both agree when H is complex
// symmetric and neither depends on how the eigenvector pairs are scaled.
#pragma once

#include "fwl/eigensolvers.hpp"
#include "fwl/repeller.hpp"
#include "fwl/resonances.hpp"

#include <string>
#include <vector>

namespace fwl {

/// <n|alpha> for one oscillator mode, n = 0..n_max.
Eigen::VectorXcd coherent_amplitudes(cplx alpha, int n_max);

/// alpha = (q + i p) / sqrt(2 hbar).
inline cplx coherent_alpha(double q, double p, double hbar) { return cplx(q, p) / std::sqrt(2.0 * hbar); }

/// <nx, ny|Omega> with Omega = (x, y, px, py).
cplx coherent_overlap(int nx, int ny, const Eigen::Vector4d& omega, double hbar);

/// <n|Omega> for every basis state, in basis order.
Eigen::VectorXcd coherent_vector(const Eigen::Vector4d& omega, const BasisSpec& basis);

enum class HusimiKernel { Resolvent, Literal };
enum class RotationApprox { Identity, Diagonal };

std::string to_string(HusimiKernel k);
std::string to_string(RotationApprox r);
HusimiKernel kernel_from_string(const std::string& s);
RotationApprox rotation_from_string(const std::string& s);

struct HusimiConfig {
  /// Reference energy in units of the saddle energy.
  double E0 = 1.8;
  int n_each_side = 20;
  /// Width cutoff Gamma_0 (absolute units); 0 means 3 x the median width of
  /// the states picked without a cutoff.
  double gamma_cut = 0.0;
  int grid = 200;
  /// Angle of the spectrum the states come from; must match the catalog.
  double theta = 0.2;
  HusimiKernel kernel = HusimiKernel::Resolvent;
  RotationApprox rotation = RotationApprox::Identity;
  int workers = 0;

  void validate() const;
};

/// Resonances feeding the average, with their eigenvectors at `theta`.
struct HusimiStates {
  std::vector<Resonance> resonances;
  EigenSystem system;
  double gamma_cut = 0.0;
  int below = 0;
  int above = 0;
};

/// Picks up to n_each_side accepted resonances on each side of E0 with
/// Gamma < gamma_cut, nearest first.
std::vector<Resonance> select_states(const SpectrumCatalog& catalog, const HusimiConfig& cfg, double* gamma_cut_used);

/// Selection plus inverse-iteration eigenvectors of H(theta).
HusimiStates prepare_states(const SpectrumCatalog& catalog, const HusimiConfig& cfg);

struct HusimiGrid {
  /// Row-major, index iy * n + ipy over the unit square (cell centres).
  Eigen::VectorXd values;
  /// 1 where the cell centre lies outside the bounding curve.
  std::vector<char> masked;
  int n = 0;
  SosFrame frame;
  double energy = 0.0;
  HusimiConfig config;
  int states_used = 0;
  double gamma_cut = 0.0;

  std::size_t index(int iy, int ipy) const { return static_cast<std::size_t>(iy) * n + ipy; }
  /// Unit-square coordinates of a cell centre.
  Eigen::Vector2d unit_center(int iy, int ipy) const { return {(iy + 0.5) / n, (ipy + 0.5) / n}; }
};

/// Evaluates the average at energy E (absolute units) on cfg.grid x cfg.grid cells.
/// values/right/left columns describe the states; hbar and n_max come from `basis`.
HusimiGrid averaged_husimi(const EigenSystem& states, const BasisSpec& basis, double E, const HusimiConfig& cfg,
                           const ModelParams& p);

/// Cells whose centre lies within eps (unit-square distance) of a repeller point.
std::vector<char> near_repeller(const HusimiGrid& grid, const Eigen::MatrixX2d& unit_points, double eps);

/// Share of the (positive part of the) Husimi mass on cells near the repeller.
/// eps defaults to two cell widths.
double repeller_overlap_score(const HusimiGrid& grid, const RepellerSet& repeller, double eps = 0.0);

/// Score a uniform density over the unmasked cells would get.
double uniform_baseline_score(const HusimiGrid& grid, const RepellerSet& repeller, double eps = 0.0);

}  // namespace fwl
