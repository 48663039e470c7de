#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "lgpctrl/dynamics/el_components.h"

namespace lgpctrl {
namespace dynamics {

/// What a controller reports about one control step, in its own coordinates.
/// Fields a controller does not produce stay empty (vectors) or NaN.
struct StepRecord {
  Eigen::VectorXd q;
  Eigen::VectorXd dq;
  Eigen::VectorXd e;
  Eigen::VectorXd de;
  Eigen::VectorXd tau;
  double sigma_min{std::numeric_limits<double>::quiet_NaN()};
  double sigma_max{std::numeric_limits<double>::quiet_NaN()};
};

class Controller {
 public:
  virtual ~Controller() = default;
  /// Plant torque at time t. Called once per integration step; the result is
  /// held for the whole step. `record` is null on samples that are not kept.
  virtual Eigen::VectorXd Compute(double t, const JointState& plant_state,
                                  StepRecord* record) = 0;
  /// Clears any cached history before a new run.
  virtual void Reset() {}
};

/// Adapts a plain function of (t, state) into a Controller.
class FunctionController final : public Controller {
 public:
  using Fn = std::function<Eigen::VectorXd(double, const JointState&)>;
  explicit FunctionController(Fn fn) : fn_(std::move(fn)) {}
  Eigen::VectorXd Compute(double t, const JointState& s,
                          StepRecord* record) override;

 private:
  Fn fn_;
};

struct Trajectory {
  double dt{0.0};
  std::vector<double> t;
  std::vector<Eigen::VectorXd> q;
  std::vector<Eigen::VectorXd> dq;
  std::vector<Eigen::VectorXd> e;
  std::vector<Eigen::VectorXd> de;
  std::vector<Eigen::VectorXd> tau;
  std::vector<double> sigma_min;
  std::vector<double> sigma_max;
  bool diverged{false};
  double divergence_time{std::numeric_limits<double>::quiet_NaN()};

  int size() const { return static_cast<int>(t.size()); }
  bool has_errors() const { return !e.empty(); }
};

struct IntegrateOptions {
  /// A state with ‖q‖ or ‖q̇‖ above this counts as diverged.
  double divergence_threshold{1e6};
  /// RK4 steps per sample. The controller runs once per sample and its torque
  /// is held for all substeps; 1 gives zero-order hold at the integration step.
  int substeps{1};
  /// Keep every k-th sample; the others pass a null record to the controller.
  int record_every{1};
};

/// Classical RK4 with the controller torque held constant over each step.
/// Samples are recorded at t = k·dt for k = 0..round(t_end/dt). A non-finite
/// or oversized state ends the run early and marks it diverged.
/// `dt` is the sample period; the RK4 step is dt / options.substeps. With
/// record_every = k only samples k·j are stored and Trajectory::dt is k·dt.
/// @throws InputError unless dt > 0, t_end >= dt, substeps >= 1 and
/// record_every >= 1.
Trajectory Integrate(const LagrangianModel& plant, Controller* controller,
                     const JointState& x0, double t_end, double dt,
                     const IntegrateOptions& options = {});

}  // namespace dynamics
}  // namespace lgpctrl
