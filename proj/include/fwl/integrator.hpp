// Fixed-step Gragg-Bulirsch-Stoer extrapolation for the Hamiltonian flow.
//
// Each step runs the modified midpoint rule with 2, 4, ..., 2k substeps and
// Richardson-extrapolates in h^2, giving an explicit scheme of order 2k.
#pragma once

#include "fwl/model.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace fwl {

struct IntegratorConfig {
  double step = 0.02;
  /// Largest tolerated energy change over a single step.
  double tolerance = 1e-9;
  /// Must be even and >= 4.
  int order = 10;

  void validate() const;
};

enum class Direction { Forward, Backward };

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One extrapolated step of signed size h. Pure function of its inputs.
Eigen::Vector4d gbs_step(const Eigen::Vector4d& z, double h, const ModelParams& p, int order);

/// Observer return value: keep going or stop the propagation.
enum class Control { Continue, Stop };

/// Callback invoked after every accepted step with (previous, current).
using StepObserver = std::function<Control(const PhaseState&, const PhaseState&)>;

struct PropagationResult {
  PhaseState final_state;
  bool escaped = false;
  bool stopped = false;
  double max_step_drift = 0.0;
};

/// Propagates s0 for |duration| in the given direction. When r_escape > 0 the
/// run ends as soon as x^2 + y^2 > r_escape^2. Throws IntegrationError if a step
/// changes the energy by more than cfg.tolerance.
PropagationResult propagate(const PhaseState& s0, const ModelParams& p, const IntegratorConfig& cfg, double duration,
                            Direction dir, double r_escape = 0.0, const StepObserver& observer = {});

/// States at every step multiple, starting with s0; stops early on escape.
std::vector<PhaseState> integrate(const PhaseState& s0, const ModelParams& p, const IntegratorConfig& cfg, double T,
                                  Direction dir, double r_escape = 0.0);

}  // namespace fwl
