#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lgpctrl/harness/config.h"
#include "lgpctrl/harness/experiment.h"
#include "lgpctrl/lgp/model.h"

namespace lgpctrl {
namespace harness {

/// Statistics of one (ω, controller) cell over its realizations. Means and
/// sample standard deviations use converged runs only.
struct MonteCarloCell {
  double omega{0.0};
  std::string controller;
  int realizations{0};
  int diverged{0};
  int converged{0};
  double x_l2_mean{0.0};
  double x_l2_std{0.0};
  double tau_l2_mean{0.0};
  double tau_l2_std{0.0};
};

struct MonteCarloResult {
  /// Ordered by ω, then roster position.
  std::vector<MonteCarloCell> cells;
  /// Smallest ω at which the controller diverged at least once, or NaN.
  double onset(const std::string& controller) const;
  int total_divergences(const std::string& controller) const;
};

/// Tracking of q_d = a·sin(ωt)·1 for every ω of the sweep from initial states
/// uniform on [−h, h]^{2N}, simulated to 8π/ω and scored over t ≥ 4π/ω. A run
/// diverges when the integrator flags it or max‖e‖ over the window exceeds
/// montecarlo.divergence_error. Realization r of every ω and controller uses
/// the same initial state stream, so results do not depend on scheduling.
MonteCarloResult RunMonteCarlo(const ExperimentConfig& config, const Plant& plant,
                               const std::shared_ptr<const lgp::LgpModel>& model);

}  // namespace harness
}  // namespace lgpctrl
