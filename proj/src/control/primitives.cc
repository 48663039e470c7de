#include "lgpctrl/control/primitives.h"

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace control {

double Heaviside(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return 0.0;
  return 0.5;
}

numerics::SymMatrix Projector(const Eigen::VectorXd& e, double eps_reg) {
  if (!(eps_reg >= 0.0) || !e.allFinite()) {
    throw InputError("Projector: need finite e and eps_reg >= 0");
  }
  const double denom = eps_reg + e.squaredNorm();
  if (denom == 0.0) throw InputError("Projector: undefined for e = 0");
  return numerics::SymMatrix(e * e.transpose() / denom);
}

}  // namespace control
}  // namespace lgpctrl
