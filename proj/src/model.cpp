#include "fwl/model.hpp"

#include <algorithm>
#include <limits>

namespace fwl {

void ModelParams::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("model.lambda must be >= 0");
  if (!(omega >= 0.0 && omega < 1.0)) throw std::invalid_argument("model.omega must lie in [0, 1)");
  if (!(hbar > 0.0)) throw std::invalid_argument("model.hbar must be > 0");
}

Branch branch_from_string(const std::string& s) {
  if (s == "forward") return Branch::Forward;
  if (s == "backward") return Branch::Backward;
  throw std::invalid_argument("unknown branch '" + s + "'");
}

double sos_y_min(double E, const ModelParams& p) {
  if (!(E > 0.0)) throw std::invalid_argument("section energy must be > 0");
  const auto g = [&](double y) { return sos_discriminant(y, 0.0, E, p); };
  double lo = -1.0;
  while (g(lo) > 0.0) lo *= 2.0;
  double hi = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::abs(lo); ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return hi;
}

double sos_y_max(double E, const ModelParams& p) {
  if (!(E > 0.0)) throw std::invalid_argument("section energy must be > 0");
  const double a = 1.0 - p.omega * p.omega;
  if (p.lambda == 0.0) return std::sqrt(2.0 * E / a);
  const auto g = [&](double y) { return sos_discriminant(y, 0.0, E, p); };
  double hi = saddle_distance(p);
  if (g(hi) >= 0.0) return std::numeric_limits<double>::infinity();
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return lo;
}

SosFrame sos_frame(double E, const ModelParams& p, double y_cap) {
  SosFrame f;
  f.y_lo = sos_y_min(E, p);
  f.y_hi = y_cap;
  if (!(f.y_hi > f.y_lo)) throw std::invalid_argument("section frame cap lies below the inner turning point");
  const double g_max = std::max(sos_discriminant(0.0, 0.0, E, p), sos_discriminant(y_cap, 0.0, E, p));
  f.py_hi = std::sqrt(g_max);
  f.py_lo = -f.py_hi;
  return f;
}

}  // namespace fwl
