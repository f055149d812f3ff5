#include "fwl/integrator.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace fwl {

void IntegratorConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("integrator.step must be > 0");
  if (!(tolerance > 0.0)) throw std::invalid_argument("integrator.tolerance must be > 0");
  if (order < 4 || order % 2 != 0 || order > 16) throw std::invalid_argument("integrator.order must be even, 4..16");
}

Eigen::Vector4d gbs_step(const Eigen::Vector4d& z, double h, const ModelParams& p, int order) {
  constexpr int kMaxLevels = 8;
  const int levels = order / 2;
  std::array<Eigen::Vector4d, kMaxLevels> table;
  const Eigen::Vector4d f0 = eom(z, p);

  for (int k = 0; k < levels; ++k) {
    const int n = 2 * (k + 1);
    const double hs = h / n;
    Eigen::Vector4d prev = z;
    Eigen::Vector4d cur = z + hs * f0;
    for (int m = 1; m < n; ++m) {
      Eigen::Vector4d next = prev + 2.0 * hs * eom(cur, p);
      prev = cur;
      cur = next;
    }
    Eigen::Vector4d row = 0.5 * (cur + prev + hs * eom(cur, p));

    // Aitken-Neville sweep in h^2; table[j] holds the level-(k-1) column j.
    for (int j = 1; j <= k; ++j) {
      const double ratio = static_cast<double>(n) / (2 * (k - j + 1));
      Eigen::Vector4d improved = row + (row - table[j - 1]) / (ratio * ratio - 1.0);
      table[j - 1] = row;
      row = improved;
    }
    table[k] = row;
  }
  return table[levels - 1];
}

PropagationResult propagate(const PhaseState& s0, const ModelParams& p, const IntegratorConfig& cfg, double duration,
                            Direction dir, double r_escape, const StepObserver& observer) {
  cfg.validate();
  if (!(duration > 0.0)) throw std::invalid_argument("propagation duration must be > 0");
  const double sign = dir == Direction::Forward ? 1.0 : -1.0;
  const double r2_escape = r_escape * r_escape;

  PropagationResult res;
  PhaseState cur = s0;
  double e_cur = energy(cur.z, p);
  const auto n_full = static_cast<long long>(std::floor(duration / cfg.step));
  const double tail = duration - static_cast<double>(n_full) * cfg.step;
  const long long n_steps = n_full + (tail > 1e-12 * cfg.step ? 1 : 0);

  for (long long i = 0; i < n_steps; ++i) {
    const double h = sign * (i < n_full ? cfg.step : tail);
    PhaseState next;
    next.z = gbs_step(cur.z, h, p, cfg.order);
    next.t = i < n_full ? s0.t + sign * static_cast<double>(i + 1) * cfg.step : s0.t + sign * duration;
    const double e_next = energy(next.z, p);
    const double drift = std::abs(e_next - e_cur);
    if (!(drift <= cfg.tolerance)) {
      std::ostringstream msg;
      msg << "step rejected at t=" << cur.t << ": energy change " << drift << " exceeds tolerance " << cfg.tolerance
          << " (reduce integrator.step)";
      throw IntegrationError(msg.str());
    }
    res.max_step_drift = std::max(res.max_step_drift, drift);
    const bool escaped = r_escape > 0.0 && next.z[0] * next.z[0] + next.z[1] * next.z[1] > r2_escape;
    if (observer && observer(cur, next) == Control::Stop) {
      res.final_state = next;
      res.stopped = true;
      return res;
    }
    cur = next;
    e_cur = e_next;
    if (escaped) {
      res.escaped = true;
      break;
    }
  }
  res.final_state = cur;
  return res;
}

std::vector<PhaseState> integrate(const PhaseState& s0, const ModelParams& p, const IntegratorConfig& cfg, double T,
                                  Direction dir, double r_escape) {
  std::vector<PhaseState> out{s0};
  out.reserve(static_cast<std::size_t>(T / cfg.step) + 2);
  propagate(s0, p, cfg, T, dir, r_escape, [&](const PhaseState&, const PhaseState& next) {
    out.push_back(next);
    return Control::Continue;
  });
  return out;
}

}  // namespace fwl
