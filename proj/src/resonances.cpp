#include "fwl/resonances.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <stdexcept>

namespace fwl {

namespace {

// Eigenvalues of one spectrum sorted by real part, split by symmetry class.
class NearestIndex {
 public:
  explicit NearestIndex(const ThetaSpectrum& s) {
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      const int c = s.symmetry.empty() ? -1 : s.symmetry[static_cast<std::size_t>(i)];
      groups_[c].push_back(s.values[i]);
    }
    for (auto& [c, v] : groups_)
      std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  }

  struct Hit {
    cplx best;
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
  };

  Hit nearest(cplx z, int cls) const {
    Hit hit;
    const auto it = groups_.find(groups_.count(cls) ? cls : -1);
    if (it == groups_.end()) return hit;
    const auto& v = it->second;
    const auto start = std::lower_bound(v.begin(), v.end(), z.real(), [](cplx a, double r) { return a.real() < r; });
    const auto consider = [&](cplx w) {
      const double d = std::abs(w - z);
      if (d < hit.d1) {
        hit.d2 = hit.d1;
        hit.d1 = d;
        hit.best = w;
      } else if (d < hit.d2) {
        hit.d2 = d;
      }
    };
    for (auto p = start; p != v.end() && p->real() - z.real() < hit.d2; ++p) consider(*p);
    for (auto p = start; p != v.begin();) {
      --p;
      if (z.real() - p->real() >= hit.d2) break;
      consider(*p);
    }
    return hit;
  }

 private:
  std::map<int, std::vector<cplx>> groups_;
};

}  // namespace

SpectrumCatalog theta_filter(std::span<const ThetaSpectrum> spectra, const ThetaFilterOptions& opts, double hbar) {
  if (spectra.size() < 3) throw std::invalid_argument("theta_filter: need at least 3 rotation angles");
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("theta_filter: tolerance must be > 0");
  const double radius = opts.match_radius > 0.0 ? opts.match_radius : opts.tolerance;

  std::vector<NearestIndex> index;
  index.reserve(spectra.size());
  for (const auto& s : spectra) index.emplace_back(s);

  const std::size_t mid = spectra.size() / 2;
  const ThetaSpectrum& ref = spectra[mid];
  SpectrumCatalog cat;
  cat.tolerance = opts.tolerance;
  cat.reference_theta = ref.theta;
  for (const auto& s : spectra) cat.theta_grid.push_back(s.theta);

  for (Eigen::Index i = 0; i < ref.values.size(); ++i) {
    const cplx e = ref.values[i];
    const int cls = ref.symmetry.empty() ? -1 : ref.symmetry[static_cast<std::size_t>(i)];
    if (e.imag() > opts.imag_tolerance) {
      ++cat.positive_imaginary;
      continue;
    }
    double path = 0.0;
    bool ambiguous = false;
    // Walk outwards from the reference angle in both directions.
    for (const int step : {+1, -1}) {
      cplx cur = e;
      for (auto k = static_cast<std::ptrdiff_t>(mid) + step; k >= 0 && k < static_cast<std::ptrdiff_t>(spectra.size()); k += step) {
        const auto hit = index[static_cast<std::size_t>(k)].nearest(cur, cls);
        path += hit.d1;
        if (hit.d2 < radius) ambiguous = true;
        cur = hit.best;
        if (path >= opts.tolerance) break;
      }
      if (path >= opts.tolerance) break;
    }
    if (path >= opts.tolerance) continue;
    if (ambiguous) {
      ++cat.ambiguous;
      continue;
    }
    Resonance r;
    r.energy = e.real();
    r.width = std::max(0.0, -2.0 * e.imag());
    r.theta_stability = path;
    r.hbar = hbar;
    r.symmetry = cls;
    cat.resonances.push_back(r);
  }
  std::sort(cat.resonances.begin(), cat.resonances.end(),
            [](const Resonance& a, const Resonance& b) { return a.energy < b.energy; });
  return cat;
}

}  // namespace fwl
