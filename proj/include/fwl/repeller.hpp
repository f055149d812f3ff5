// Classical repeller on the x = 0, xdot < 0 section: trajectories that stay
// trapped for tau0 forwards (or backwards) in time are re-run for
// stretch * tau0 and their section crossings collected.
#pragma once

#include "fwl/integrator.hpp"
#include "fwl/model.hpp"

#include <cstdint>
#include <vector>

namespace fwl {

struct SurvivalConfig {
  /// Energy in units of the saddle energy.
  double scaled_energy = 1.8;
  double tau0 = 30.0;
  double stretch = 20.0;
  double r_escape = 20.0;
  std::size_t n_samples = 700000;
  std::uint64_t seed = 12345;
  /// A crossing is kept only if it lies at least this long after the start of
  /// the re-run and this long before the escape. Crossings close to either end
  /// sit on the stable or unstable manifold rather than on the repeller itself.
  double margin = 15.0;
  /// Drop trajectories that never escape during the stretched run (KAM islands).
  bool exclude_regular = true;
  int workers = 0;

  double energy(const ModelParams& p) const { return scaled_energy * saddle_energy(p); }
  void validate(const ModelParams& p) const;
};

struct RepellerSet {
  /// Section coordinates in physical units; use `frame` for the unit square.
  std::vector<SosPoint> points;
  double energy = 0.0;
  SurvivalConfig provenance;
  SosFrame frame;
  std::size_t forward_survivors = 0;
  std::size_t backward_survivors = 0;
  std::size_t regular_excluded = 0;
  /// Crossings dropped by the margin rule.
  std::size_t trimmed = 0;

  /// Points mapped into the frame's unit square, as rows (u, v).
  Eigen::MatrixX2d unit_points() const;
};

/// Uniform (y, py) samples inside the bounding curve with |y| < r_escape,
/// lifted to x = 0 with xdot < 0. Deterministic per seed.
std::vector<PhaseState> sample_sos_initial_conditions(const SurvivalConfig& cfg, const ModelParams& p);

/// Flags, per initial condition, whether it stays inside r_escape for tau0.
std::vector<bool> survival_mask(const std::vector<PhaseState>& ics, Direction dir, const SurvivalConfig& cfg,
                                const ModelParams& p, const IntegratorConfig& icfg);

/// Initial conditions that stay inside r_escape for tau0 in direction dir.
std::vector<PhaseState> survivors(const std::vector<PhaseState>& ics, Direction dir, const SurvivalConfig& cfg,
                                  const ModelParams& p, const IntegratorConfig& icfg);

struct CrossingRun {
  std::vector<SosPoint> crossings;
  bool escaped = false;
  /// Time until escape (or the full duration if the run did not escape).
  double lifetime = 0.0;
};

/// Section crossings (x = 0, xdot < 0) along a trajectory of length `duration`,
/// each refined to |x| < 1e-10. Crossings at the start time are not recorded.
CrossingRun record_crossings(const PhaseState& s0, Direction dir, double duration, double r_escape,
                             const ModelParams& p, const IntegratorConfig& icfg);

/// Throws std::runtime_error when no points are found (tau0 too large or too few samples).
RepellerSet build_repeller(const SurvivalConfig& cfg, const ModelParams& p, const IntegratorConfig& icfg);

}  // namespace fwl
