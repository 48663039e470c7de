#pragma once

#include <functional>
#include <memory>

#include "lgpctrl/dynamics/el_components.h"
#include "lgpctrl/lgp/kernels.h"

namespace lgpctrl {
namespace lgp {

struct HyperoptOptions {
  /// Maximum number of objective evaluations, including the initial guess.
  int budget{200};
  /// Initial simplex step in log-parameter space.
  double initial_step{0.5};
  /// Restart once the simplex characteristic size falls below this.
  double size_tolerance{1e-3};
};

struct HyperoptResult {
  Hyperparams best;
  double objective{0.0};
  double initial_objective{0.0};
  int evaluations{0};
  int restarts{0};
};

using HyperObjective = std::function<double(const Hyperparams&)>;

/// Nelder–Mead over the log of all amplitudes and lengths, restarted from
/// the best point whenever the simplex collapses, until the budget is spent.
/// Objective failures (exceptions, non-finite values) count as +∞.
/// @throws InputError if budget < 1.
HyperoptResult OptimizeHyper(const HyperObjective& objective,
                             const Hyperparams& initial,
                             const HyperoptOptions& options);

/// Sum of squared torque residuals over `train` and `validation` for a model
/// fitted to `train`.
double TorqueResidualObjective(
    const TrainingSet& train, const TrainingSet& validation,
    const Hyperparams& h,
    const std::shared_ptr<const dynamics::LagrangianModel>& prior);

/// Root-mean-square torque error of a model over a data set.
double TorqueRmse(const dynamics::LagrangianModel& model, const TrainingSet& data);

}  // namespace lgp
}  // namespace lgpctrl
