#include "fwl/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fwl {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw InsufficientPointsError("fit_line: need at least 3 points");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n));
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));
  const double xm = xv.mean(), ym = yv.mean();
  const Eigen::VectorXd dx = xv.array() - xm;
  const double sxx = dx.squaredNorm();
  if (!(sxx > 0.0)) throw InsufficientPointsError("fit_line: abscissae are all equal");
  LineFit f;
  f.n = n;
  f.slope = dx.dot(yv.array().matrix() - Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), ym)) / sxx;
  f.intercept = ym - f.slope * xm;
  const double rss = (yv.array() - f.intercept - f.slope * xv.array()).matrix().squaredNorm();
  f.slope_err = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  return f;
}

LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("fit_loglog: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw std::invalid_argument("log_spaced: need 0 < lo < hi and n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

CorrelationCurve correlation_sum(const Eigen::Ref<const Eigen::MatrixXd>& points, std::span<const double> scales,
                                 const CorrelationOptions& opts) {
  if (scales.empty()) throw std::invalid_argument("correlation_sum: empty scale list");
  if (!std::is_sorted(scales.begin(), scales.end()) || !(scales.front() > 0.0))
    throw std::invalid_argument("correlation_sum: scales must be positive and ascending");
  const auto M = static_cast<std::size_t>(points.rows());
  if (M < 2) throw std::invalid_argument("correlation_sum: need at least 2 points");

  std::vector<double> s2(scales.size());
  std::transform(scales.begin(), scales.end(), s2.begin(), [](double s) { return s * s; });
  // hist[j]: pairs whose squared distance first falls below s2[j].
  std::vector<std::uint64_t> hist(scales.size() + 1, 0);
  const auto bin = [&](double d2) {
    return static_cast<std::size_t>(std::upper_bound(s2.begin(), s2.end(), d2) - s2.begin());
  };

  CorrelationCurve curve;
  curve.scales.assign(scales.begin(), scales.end());
  const Eigen::MatrixXd rows = points.transpose();  // one point per column
  const double s2_max = s2.back();

  if (M <= opts.exact_limit) {
    for (std::size_t k = 0; k + 1 < M; ++k) {
      const auto qk = rows.col(static_cast<Eigen::Index>(k));
      for (std::size_t l = k + 1; l < M; ++l) {
        const double d2 = (rows.col(static_cast<Eigen::Index>(l)) - qk).squaredNorm();
        if (d2 < s2_max) ++hist[bin(d2)];
      }
    }
    curve.pairs_used = static_cast<std::uint64_t>(M) * (M - 1) / 2;
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> pick(0, M - 1);
    for (std::uint64_t n = 0; n < opts.subsample_pairs;) {
      const std::size_t k = pick(rng), l = pick(rng);
      if (k == l) continue;
      const double d2 = (rows.col(static_cast<Eigen::Index>(l)) - rows.col(static_cast<Eigen::Index>(k))).squaredNorm();
      if (d2 < s2_max) ++hist[bin(d2)];
      ++n;
    }
    curve.pairs_used = opts.subsample_pairs;
    curve.subsampled = true;
  }

  // Strict inequality: a pair at squared distance d2 counts for every s2[j] > d2.
  const double md = static_cast<double>(M);
  const double total_pairs = md * (md - 1.0) / 2.0;
  curve.values.resize(scales.size());
  std::uint64_t below = 0;
  for (std::size_t j = 0; j < scales.size(); ++j) {
    below += hist[j];
    const double unordered = curve.subsampled
                                 ? static_cast<double>(below) / static_cast<double>(curve.pairs_used) * total_pairs
                                 : static_cast<double>(below);
    curve.values[j] = (md + 2.0 * unordered) / (md * md);
  }
  return curve;
}

LineFit fit_dimension(CorrelationCurve& curve, double s_min, double s_max) {
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < curve.scales.size(); ++j) {
    const double s = curve.scales[j];
    if (s >= s_min * (1 - 1e-12) && s <= s_max * (1 + 1e-12) && curve.values[j] > 0.0) {
      xs.push_back(s);
      ys.push_back(curve.values[j]);
    }
  }
  if (xs.size() < 5) throw InsufficientPointsError("fit_dimension: fewer than 5 scales with C2 > 0 in fit range");
  const LineFit f = fit_loglog(xs, ys);
  curve.fit_lo = s_min;
  curve.fit_hi = s_max;
  curve.d2 = f.slope;
  curve.d2_err = f.slope_err;
  return f;
}

}  // namespace fwl
