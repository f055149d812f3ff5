// Modified Henon-Heiles Hamiltonian with a Coriolis term:
//
//   H = (px^2 + py^2)/2 + (x^2 + y^2)/2 + lambda (x^2 y - y^3/3) - omega (x py - y px)
//
// Phase-space vectors are ordered (x, y, px, py).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace fwl {

struct ModelParams {
  double lambda = 0.1;
  double omega = 0.1;
  double hbar = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

template <typename Scalar>
using PhaseVector = Eigen::Matrix<Scalar, 4, 1>;

struct PhaseState {
  Eigen::Vector4d z = Eigen::Vector4d::Zero();
  double t = 0.0;

  double x() const { return z[0]; }
  double y() const { return z[1]; }
  double px() const { return z[2]; }
  double py() const { return z[3]; }
};

enum class Branch { Forward, Backward };

inline const char* to_string(Branch b) { return b == Branch::Forward ? "forward" : "backward"; }
Branch branch_from_string(const std::string& s);

/// A crossing of x = 0 with xdot < 0. Forward-survivor trajectories populate
/// the future-trapped branch, backward survivors the past-trapped one.
struct SosPoint {
  double y = 0.0;
  double py = 0.0;
  double t_cross = 0.0;
  Branch branch = Branch::Forward;
};

/// Energy of the three zero-velocity-surface saddles, (1 - omega^2)^3 / (6 lambda^2).
inline double saddle_energy(const ModelParams& p) {
  const double a = 1.0 - p.omega * p.omega;
  return a * a * a / (6.0 * p.lambda * p.lambda);
}

/// Distance of the saddles from the origin, (1 - omega^2) / lambda. Infinite
/// (like the saddle energy) in the harmonic limit lambda = 0.
inline double saddle_distance(const ModelParams& p) { return (1.0 - p.omega * p.omega) / p.lambda; }

template <typename Derived>
typename Derived::Scalar energy(const Eigen::MatrixBase<Derived>& z, const ModelParams& p) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 4);
  using S = typename Derived::Scalar;
  const S x = z[0], y = z[1], px = z[2], py = z[3];
  return S(0.5) * (px * px + py * py) + S(0.5) * (x * x + y * y) +
         S(p.lambda) * (x * x * y - y * y * y / S(3)) - S(p.omega) * (x * py - y * px);
}

inline double energy(const PhaseState& s, const ModelParams& p) { return energy(s.z, p); }

/// Hamilton's equations: (xdot, ydot, pxdot, pydot).
template <typename Derived>
PhaseVector<typename Derived::Scalar> eom(const Eigen::MatrixBase<Derived>& z, const ModelParams& p) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 4);
  using S = typename Derived::Scalar;
  const S x = z[0], y = z[1], px = z[2], py = z[3];
  const S l(p.lambda), w(p.omega);
  PhaseVector<S> v;
  v << px + w * y, py - w * x, -x - S(2) * l * x * y + w * py, -y - l * (x * x - y * y) - w * px;
  return v;
}

/// Discriminant of the x = 0 energy equation in px. Negative outside the
/// section's bounding curve.
inline double sos_discriminant(double y, double py, double E, const ModelParams& p) {
  return 2.0 * E - py * py - (1.0 - p.omega * p.omega) * y * y + (2.0 * p.lambda / 3.0) * y * y * y;
}

/// px on the section x = 0 at energy E, taking the root with xdot = px + omega y < 0.
/// Empty when (y, py) lies outside the bounding curve.
inline std::optional<double> sos_momentum(double y, double py, double E, const ModelParams& p) {
  const double d = sos_discriminant(y, py, E, p);
  if (d < 0.0) return std::nullopt;
  return -p.omega * y - std::sqrt(d);
}

/// Full phase state on the section, or empty when out of bounds.
inline std::optional<PhaseState> sos_state(double y, double py, double E, const ModelParams& p) {
  const auto px = sos_momentum(y, py, E, p);
  if (!px) return std::nullopt;
  PhaseState s;
  s.z << 0.0, y, *px, py;
  return s;
}

/// Upper half of the bounding curve, py_max(y); zero where the section is closed.
inline double sos_py_max(double y, double E, const ModelParams& p) {
  const double g = sos_discriminant(y, 0.0, E, p);
  return g > 0.0 ? std::sqrt(g) : 0.0;
}

/// Affine map of the (y, py) section onto the unit square. Both the classical
/// repeller and the Husimi grid are reported in these coordinates.
struct SosFrame {
  double y_lo = 0.0, y_hi = 1.0;
  double py_lo = 0.0, py_hi = 1.0;

  Eigen::Vector2d to_unit(double y, double py) const {
    return {(y - y_lo) / (y_hi - y_lo), (py - py_lo) / (py_hi - py_lo)};
  }
  Eigen::Vector2d from_unit(double u, double v) const {
    return {y_lo + u * (y_hi - y_lo), py_lo + v * (py_hi - py_lo)};
  }
};

/// Frame spanning the section from the inner turning point y_lo up to y_cap,
/// with py symmetric about zero at the largest |py| reached on that interval.
SosFrame sos_frame(double E, const ModelParams& p, double y_cap);

/// Smallest y (negative) where the bounding curve closes on the section.
double sos_y_min(double E, const ModelParams& p);

/// Positive y where the bounding curve closes, or +inf when the section is
/// open towards the saddle (E above the saddle energy).
double sos_y_max(double E, const ModelParams& p);

/// Default frame: y capped at the saddle distance (or the outer turning point
/// of a closed section), which bounds the region where the trapped set lives.
inline SosFrame sos_frame(double E, const ModelParams& p) {
  return sos_frame(E, p, std::min(saddle_distance(p), sos_y_max(E, p)));
}

}  // namespace fwl
