// Grassberger-Procaccia correlation sum and the shared log-log line fitter.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fwl {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Standard error of the slope from the residual variance.
  double slope_err = 0.0;
  std::size_t n = 0;
};

class InsufficientPointsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Ordinary least squares y = slope x + intercept. Needs >= 3 points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Slope of ln(y) against ln(x); every x and y must be positive.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// n logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

struct CorrelationCurve {
  std::vector<double> scales;
  std::vector<double> values;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double d2 = 0.0;
  double d2_err = 0.0;
  /// Number of unordered distinct pairs examined; equals M(M-1)/2 when exact.
  std::uint64_t pairs_used = 0;
  bool subsampled = false;
};

struct CorrelationOptions {
  /// Above this many points, pairs are subsampled uniformly.
  std::size_t exact_limit = 50000;
  std::uint64_t subsample_pairs = 200000000;
  std::uint64_t seed = 7;
};

/// C2(s) = #{(k, l) : |q_k - q_l| < s} / M^2 over ordered pairs, self-pairs
/// included. `points` holds one point per row.
CorrelationCurve correlation_sum(const Eigen::Ref<const Eigen::MatrixXd>& points, std::span<const double> scales,
                                 const CorrelationOptions& opts = {});

/// Fits ln C2 against ln s over [s_min, s_max] and stores the slope in the curve.
/// Throws InsufficientPointsError with fewer than 5 usable scales.
LineFit fit_dimension(CorrelationCurve& curve, double s_min, double s_max);

}  // namespace fwl
