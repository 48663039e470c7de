#pragma once

#include <string>

#include "lgpctrl/dynamics/integrator.h"

namespace lgpctrl {
namespace harness {

/// Steady-state performance of one run. L2 norms integrate over the window by
/// the trapezoid rule; max and mean are over samples.
struct MetricsRow {
  std::string controller;
  double tau_l2{0.0};
  double tau_max{0.0};
  double tau_mean{0.0};
  /// ‖[eᵀ ėᵀ]‖_L2.
  double x_l2{0.0};
  double e_max{0.0};
  double de_max{0.0};
  double e_mean{0.0};
  double de_mean{0.0};
  int samples{0};
  bool diverged{false};
};

/// Metrics over samples with t ≥ window_start. A single-sample window gives
/// L2 = value·√dt.
/// @throws InputError if the window holds no sample or the trajectory has no
/// error record.
MetricsRow ComputeMetrics(const dynamics::Trajectory& traj, double window_start,
                          const std::string& controller = "");

/// Row for a run that diverged: every metric is +∞.
MetricsRow DivergedRow(const std::string& controller);

}  // namespace harness
}  // namespace lgpctrl
