#include "lgpctrl/dynamics/integrator.h"

#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace dynamics {

Eigen::VectorXd FunctionController::Compute(double t, const JointState& s,
                                            StepRecord* record) {
  return fn_(t, s);
}

namespace {

struct Derivative {
  Eigen::VectorXd dq;
  Eigen::VectorXd ddq;
};

Derivative Rhs(const LagrangianModel& plant, const Eigen::VectorXd& q,
               const Eigen::VectorXd& dq, const Eigen::VectorXd& tau) {
  const ElComponents c = plant.Components(q, dq);
  return {dq, ForwardDynamics(c, dq, tau)};
}

bool Healthy(const JointState& s, double threshold) {
  return s.q.allFinite() && s.dq.allFinite() && s.q.norm() <= threshold &&
         s.dq.norm() <= threshold;
}

void Record(Trajectory* traj, double t, const JointState& plant_state,
            const Eigen::VectorXd& tau, StepRecord&& rec) {
  traj->t.push_back(t);
  traj->q.push_back(rec.q.size() ? std::move(rec.q) : plant_state.q);
  traj->dq.push_back(rec.dq.size() ? std::move(rec.dq) : plant_state.dq);
  traj->tau.push_back(rec.tau.size() ? std::move(rec.tau) : tau);
  if (rec.e.size()) {
    traj->e.push_back(std::move(rec.e));
    traj->de.push_back(std::move(rec.de));
  }
  traj->sigma_min.push_back(rec.sigma_min);
  traj->sigma_max.push_back(rec.sigma_max);
}

}  // namespace

Trajectory Integrate(const LagrangianModel& plant, Controller* controller,
                     const JointState& x0, double t_end, double dt,
                     const IntegrateOptions& options) {
  if (!(dt > 0.0) || !(t_end >= dt) || options.substeps < 1 ||
      options.record_every < 1) {
    throw InputError(
        "Integrate: need dt > 0, t_end >= dt, substeps >= 1, record_every >= 1");
  }
  if (x0.q.size() != plant.dof() || x0.dq.size() != plant.dof()) {
    throw InputError("Integrate: initial state dimension mismatch");
  }
  const long steps = std::lround(t_end / dt);
  Trajectory traj;
  traj.dt = dt * options.record_every;
  traj.t.reserve(steps / options.record_every + 1);
  controller->Reset();

  JointState x = x0;
  for (long k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const bool keep = k % options.record_every == 0;
    StepRecord rec;
    Eigen::VectorXd tau;
    try {
      tau = controller->Compute(t, x, keep ? &rec : nullptr);
    } catch (const DecompositionError&) {
      traj.diverged = true;
      traj.divergence_time = t;
      break;
    }
    if (!tau.allFinite()) {
      traj.diverged = true;
      traj.divergence_time = t;
      break;
    }
    if (keep) Record(&traj, t, x, tau, std::move(rec));
    if (k == steps) break;

    JointState next = x;
    const double h = dt / options.substeps;
    try {
      for (int sub = 0; sub < options.substeps; ++sub) {
        const Derivative k1 = Rhs(plant, next.q, next.dq, tau);
        const Derivative k2 = Rhs(plant, next.q + 0.5 * h * k1.dq,
                                  next.dq + 0.5 * h * k1.ddq, tau);
        const Derivative k3 = Rhs(plant, next.q + 0.5 * h * k2.dq,
                                  next.dq + 0.5 * h * k2.ddq, tau);
        const Derivative k4 =
            Rhs(plant, next.q + h * k3.dq, next.dq + h * k3.ddq, tau);
        next.q += h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
        next.dq += h / 6.0 * (k1.ddq + 2.0 * k2.ddq + 2.0 * k3.ddq + k4.ddq);
        if (!next.q.allFinite() || !next.dq.allFinite()) break;
      }
    } catch (const DecompositionError&) {
      next.q = Eigen::VectorXd::Constant(x.q.size(), NAN);
      next.dq = next.q;
    }
    if (!Healthy(next, options.divergence_threshold)) {
      traj.diverged = true;
      traj.divergence_time = (k + 1) * dt;
      break;
    }
    x = std::move(next);
  }
  return traj;
}

}  // namespace dynamics
}  // namespace lgpctrl
