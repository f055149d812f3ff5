// Shared helpers for the unit and acceptance tests.
#pragma once

#include "fwl/integrator.hpp"
#include "fwl/model.hpp"
#include "fwl/repeller.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>

namespace fwl::testing {

inline Eigen::MatrixXd uniform_points(Eigen::Index n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd p(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) p(i, d) = u(rng);
  return p;
}

/// Left endpoints of the 2^level intervals of the middle-third Cantor construction.
inline Eigen::MatrixXd cantor_points(int level) {
  Eigen::VectorXd pts = Eigen::VectorXd::Zero(1);
  double len = 1.0;
  for (int k = 0; k < level; ++k) {
    len /= 3.0;
    Eigen::VectorXd next(2 * pts.size());
    next << pts, pts.array() + 2.0 * len;
    pts = next;
  }
  return pts;
}

/// Which of the three saddle channels a trajectory leaves through (0, 1, 2),
/// or nothing if it stays inside r_escape for T.
inline std::optional<int> exit_channel(const PhaseState& s, const ModelParams& p, double T, double r_escape = 20.0) {
  IntegratorConfig cfg;
  const auto res = propagate(s, p, cfg, T, Direction::Forward, r_escape);
  if (!res.escaped) return std::nullopt;
  const double a = std::atan2(res.final_state.y(), res.final_state.x()) - std::numbers::pi / 2;
  const int k = static_cast<int>(std::lround(a / (2 * std::numbers::pi / 3)));
  return ((k % 3) + 3) % 3;
}

/// A section point whose forward trajectory stays inside r_escape for at least
/// T, found by bisecting along py between points that leave through different
/// channels (the bracket shrinks onto the stable manifold of the repeller).
inline std::optional<PhaseState> trapped_orbit(double E, const ModelParams& p, double T, double y = 0.0) {
  const double pm = 0.95 * sos_py_max(y, E, p);
  double lo = -pm, hi = pm;
  auto c_lo = exit_channel(*sos_state(y, lo, E, p), p, 4 * T);
  auto c_hi = exit_channel(*sos_state(y, hi, E, p), p, 4 * T);
  if (!c_lo || !c_hi || *c_lo == *c_hi) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const PhaseState s = *sos_state(y, mid, E, p);
    const auto c = exit_channel(s, p, 4 * T);
    if (!c) return s;
    const auto res = propagate(s, p, IntegratorConfig{}, T, Direction::Forward, 20.0);
    if (!res.escaped) return s;
    if (*c == *c_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::nullopt;
}

/// Next section crossing of the flow started at section point q.
inline std::optional<Eigen::Vector2d> return_map(const Eigen::Vector2d& q, double E, const ModelParams& p) {
  const auto s = sos_state(q[0], q[1], E, p);
  if (!s) return std::nullopt;
  const auto run = record_crossings(*s, Direction::Forward, 60.0, 20.0, p, IntegratorConfig{});
  if (run.crossings.empty()) return std::nullopt;
  return Eigen::Vector2d(run.crossings.front().y, run.crossings.front().py);
}

/// Fixed point of the section return map (a periodic orbit) by Newton's
/// method with a finite-difference Jacobian, started from `guess`.
inline std::optional<Eigen::Vector2d> periodic_orbit(Eigen::Vector2d q, double E, const ModelParams& p) {
  for (int it = 0; it < 40; ++it) {
    const auto Pq = return_map(q, E, p);
    if (!Pq) return std::nullopt;
    const Eigen::Vector2d F = *Pq - q;
    if (F.norm() < 1e-12) return q;
    Eigen::Matrix2d J;
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d qh = q;
      qh[c] += 1e-7;
      const auto Ph = return_map(qh, E, p);
      if (!Ph) return std::nullopt;
      J.col(c) = (*Ph - qh - F) / 1e-7;
    }
    q -= J.partialPivLu().solve(F);
  }
  return std::nullopt;
}

}  // namespace fwl::testing
