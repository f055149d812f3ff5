#include "fwl/weyl.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace fwl {

std::vector<double> CountingBoxes::placement() const {
  if (!offsets.empty()) return offsets;
  std::vector<double> out(static_cast<std::size_t>(n_boxes));
  for (int i = 0; i < n_boxes; ++i) out[static_cast<std::size_t>(i)] = n_boxes == 1 ? 0.0 : -0.2 + 0.4 * i / (n_boxes - 1);
  return out;
}

void CountingBoxes::validate() const {
  if (n_boxes < 1 && offsets.empty()) throw std::invalid_argument("weyl.n_boxes must be >= 1");
  if (!(width > 0.0)) throw std::invalid_argument("weyl.width must be > 0");
  if (!(gamma_cap_factor >= 0.0)) throw std::invalid_argument("weyl.gamma_cap_factor must be >= 0");
}

BoxCount count_box(const SpectrumCatalog& catalog, const CountingBoxes& boxes) {
  boxes.validate();
  const double es = saddle_energy(catalog.params);
  const double hbar = catalog.basis.hbar;
  const double cap = boxes.gamma_cap_factor * hbar;
  BoxCount out;
  out.empty_catalog = catalog.resonances.empty();
  for (const double off : boxes.placement()) {
    const double lo = boxes.center + off - 0.5 * boxes.width;
    const double hi = boxes.center + off + 0.5 * boxes.width;
    std::size_t n = 0;
    for (const auto& r : catalog.resonances) {
      const double e = r.energy / es;
      const double g = boxes.absolute_gamma ? r.width : r.width / es;
      if (e >= lo && e <= hi && g >= 0.0 && g <= cap) ++n;
    }
    out.per_box.push_back(n);
  }
  double total = 0.0;
  for (const auto n : out.per_box) total += static_cast<double>(n);
  out.mean = out.per_box.empty() ? 0.0 : total / static_cast<double>(out.per_box.size());
  return out;
}

WeylFit fit_weyl(std::span<const double> hbars, std::span<const double> counts) {
  if (hbars.size() != counts.size()) throw std::invalid_argument("fit_weyl: size mismatch");
  if (std::set<double>(hbars.begin(), hbars.end()).size() < 4)
    throw InsufficientPointsError("fit_weyl: need at least 4 distinct hbar values");
  std::vector<double> inv(hbars.size());
  std::transform(hbars.begin(), hbars.end(), inv.begin(), [](double h) { return 1.0 / h; });
  for (const double n : counts)
    if (!(n > 0.0)) throw std::invalid_argument("fit_weyl: every count must be > 0");
  const LineFit f = fit_loglog(inv, counts);
  WeylFit w;
  w.hbars.assign(hbars.begin(), hbars.end());
  w.counts.assign(counts.begin(), counts.end());
  w.d = f.slope;
  w.d_err = f.slope_err;
  w.intercept = f.intercept;
  return w;
}

}  // namespace fwl
