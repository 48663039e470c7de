#include "lgpctrl/dynamics/el_components.h"

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace dynamics {

Eigen::VectorXd ForwardDynamics(const ElComponents& c, const Eigen::VectorXd& dq,
                                const Eigen::VectorXd& tau) {
  if (tau.size() != c.M.rows() || dq.size() != c.M.rows()) {
    throw InputError("ForwardDynamics: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(c.M);
  if (llt.info() != Eigen::Success) {
    throw DecompositionError("ForwardDynamics: mass matrix not positive definite",
                             -1);
  }
  return llt.solve(tau - c.C * dq - c.g - c.d);
}

Eigen::VectorXd InverseDynamics(const ElComponents& c, const Eigen::VectorXd& dq,
                                const Eigen::VectorXd& ddq) {
  return c.M * ddq + c.C * dq + c.g + c.d;
}

}  // namespace dynamics
}  // namespace lgpctrl
