// Resonance counting in rectangular (E_r, Gamma) boxes and the Weyl-exponent
// fit N(hbar) ~ hbar^-d.
#pragma once

#include "fwl/correlation.hpp"
#include "fwl/resonances.hpp"

#include <span>
#include <vector>

namespace fwl {

struct CountingBoxes {
  /// Box centre in units of the saddle energy.
  double center = 1.8;
  /// Box extent along E_r / E_s.
  double width = 1.0;
  /// Width cap is gamma_cap_factor * hbar.
  double gamma_cap_factor = 1.24;
  int n_boxes = 8;
  /// Centre shifts; empty means n_boxes equally spaced shifts in [-0.2, 0.2].
  std::vector<double> offsets;
  /// Apply the cap to Gamma itself instead of Gamma / E_s.
  bool absolute_gamma = false;

  std::vector<double> placement() const;
  void validate() const;
};

struct BoxCount {
  double mean = 0.0;
  std::vector<std::size_t> per_box;
  bool empty_catalog = false;
};

BoxCount count_box(const SpectrumCatalog& catalog, const CountingBoxes& boxes);

struct WeylFit {
  std::vector<double> hbars;
  std::vector<double> counts;
  double d = 0.0;
  double d_err = 0.0;
  double intercept = 0.0;
};

/// Slope of ln N against ln(1/hbar). Needs >= 4 distinct hbar values and N > 0.
WeylFit fit_weyl(std::span<const double> hbars, std::span<const double> counts);

}  // namespace fwl
