#include "fwl/repeller.hpp"

#include "fwl/parallel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fwl {

void SurvivalConfig::validate(const ModelParams& p) const {
  if (!(scaled_energy > 0.0)) throw std::invalid_argument("classical.scaled_energy must be > 0");
  if (!(tau0 > 0.0)) throw std::invalid_argument("classical.tau0 must be > 0");
  if (!(stretch >= 1.0)) throw std::invalid_argument("classical.stretch must be >= 1");
  if (!(r_escape > saddle_distance(p))) throw std::invalid_argument("classical.r_escape must exceed the saddle distance");
  if (!(margin >= 0.0)) throw std::invalid_argument("classical.margin must be >= 0");
  if (!(2.0 * margin < stretch * tau0)) throw std::invalid_argument("classical.margin must be below stretch * tau0 / 2");
  if (n_samples == 0) throw std::invalid_argument("classical.n_samples must be > 0");
}

Eigen::MatrixX2d RepellerSet::unit_points() const {
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t i = 0; i < points.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = frame.to_unit(points[i].y, points[i].py);
  return out;
}

std::vector<PhaseState> sample_sos_initial_conditions(const SurvivalConfig& cfg, const ModelParams& p) {
  cfg.validate(p);
  const double E = cfg.energy(p);
  const SosFrame box = sos_frame(E, p, cfg.r_escape);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uy(box.y_lo, box.y_hi);
  std::uniform_real_distribution<double> upy(box.py_lo, box.py_hi);

  std::vector<PhaseState> out;
  out.reserve(cfg.n_samples);
  while (out.size() < cfg.n_samples) {
    const double y = uy(rng);
    const double py = upy(rng);
    if (!(sos_discriminant(y, py, E, p) > 0.0)) continue;
    out.push_back(*sos_state(y, py, E, p));
  }
  return out;
}

std::vector<bool> survival_mask(const std::vector<PhaseState>& ics, Direction dir, const SurvivalConfig& cfg,
                                const ModelParams& p, const IntegratorConfig& icfg) {
  std::vector<char> alive(ics.size(), 0);
  parallel_for(ics.size(), cfg.workers, [&](std::size_t i) {
    const double r2 = ics[i].x() * ics[i].x() + ics[i].y() * ics[i].y();
    if (r2 > cfg.r_escape * cfg.r_escape) return;
    alive[i] = propagate(ics[i], p, icfg, cfg.tau0, dir, cfg.r_escape).escaped ? 0 : 1;
  });
  return {alive.begin(), alive.end()};
}

std::vector<PhaseState> survivors(const std::vector<PhaseState>& ics, Direction dir, const SurvivalConfig& cfg,
                                  const ModelParams& p, const IntegratorConfig& icfg) {
  const auto mask = survival_mask(ics, dir, cfg, p, icfg);
  std::vector<PhaseState> out;
  for (std::size_t i = 0; i < ics.size(); ++i)
    if (mask[i]) out.push_back(ics[i]);
  return out;
}

namespace {

// Locates the x = 0 root between `prev` and a step of signed size h, where x
// changes sign. Newton on the step length with a bisection safeguard.
PhaseState refine_crossing(const PhaseState& prev, double h, const ModelParams& p, const IntegratorConfig& icfg,
                           double x_next) {
  double lo = 0.0, hi = h;
  double x_lo = prev.x();
  double tau = h * x_lo / (x_lo - x_next);
  Eigen::Vector4d z = prev.z;
  for (int it = 0; it < 60; ++it) {
    z = gbs_step(prev.z, tau, p, icfg.order);
    if (std::abs(z[0]) < 1e-13) break;
    if ((z[0] < 0.0) == (x_lo < 0.0)) {
      lo = tau;
      x_lo = z[0];
    } else {
      hi = tau;
    }
    const double xdot = z[2] + p.omega * z[1];
    double next = tau - z[0] / xdot;
    const bool inside = (h > 0.0) ? (next > std::min(lo, hi) && next < std::max(lo, hi))
                                  : (next < std::max(lo, hi) && next > std::min(lo, hi));
    if (!inside) next = 0.5 * (lo + hi);
    tau = next;
  }
  PhaseState s;
  s.z = z;
  s.t = prev.t + tau;
  return s;
}

}  // namespace

CrossingRun record_crossings(const PhaseState& s0, Direction dir, double duration, double r_escape,
                             const ModelParams& p, const IntegratorConfig& icfg) {
  CrossingRun run;
  const auto res = propagate(s0, p, icfg, duration, dir, r_escape, [&](const PhaseState& prev, const PhaseState& next) {
    if (prev.x() * next.x() < 0.0) {
      const PhaseState c = refine_crossing(prev, next.t - prev.t, p, icfg, next.x());
      if (c.px() + p.omega * c.y() < 0.0 && std::abs(c.x()) < 1e-10)
        run.crossings.push_back({c.y(), c.py(), c.t, Branch::Forward});
    }
    return Control::Continue;
  });
  run.escaped = res.escaped;
  run.lifetime = std::abs(res.final_state.t - s0.t);
  return run;
}

RepellerSet build_repeller(const SurvivalConfig& cfg, const ModelParams& p, const IntegratorConfig& icfg) {
  cfg.validate(p);
  icfg.validate();
  RepellerSet set;
  set.energy = cfg.energy(p);
  set.provenance = cfg;
  set.frame = sos_frame(set.energy, p);

  const auto ics = sample_sos_initial_conditions(cfg, p);
  for (const Direction dir : {Direction::Forward, Direction::Backward}) {
    const auto surv = survivors(ics, dir, cfg, p, icfg);
    const Branch branch = dir == Direction::Forward ? Branch::Forward : Branch::Backward;
    (dir == Direction::Forward ? set.forward_survivors : set.backward_survivors) = surv.size();

    std::vector<CrossingRun> runs(surv.size());
    parallel_for(surv.size(), cfg.workers, [&](std::size_t i) {
      runs[i] = record_crossings(surv[i], dir, cfg.stretch * cfg.tau0, cfg.r_escape, p, icfg);
    });
    for (auto& run : runs) {
      if (cfg.exclude_regular && !run.escaped) {
        ++set.regular_excluded;
        continue;
      }
      for (auto& c : run.crossings) {
        const double elapsed = std::abs(c.t_cross);
        if (elapsed < cfg.margin || run.lifetime - elapsed < cfg.margin) {
          ++set.trimmed;
          continue;
        }
        c.branch = branch;
        set.points.push_back(c);
      }
    }
  }
  if (set.points.empty())
    throw std::runtime_error("repeller is empty: tau0 too large or n_samples too small");
  return set;
}

}  // namespace fwl
