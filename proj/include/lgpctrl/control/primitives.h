#pragma once

#include <Eigen/Dense>

#include "lgpctrl/numerics/linalg.h"

namespace lgpctrl {
namespace control {

/// h(x) = ½(1 + sign x), with sign 0 = 0.
double Heaviside(double x);

/// Regularized orthogonal projector e eᵀ / (eps_reg + ‖e‖²).
/// @throws InputError if eps_reg < 0, e is not finite, or eps_reg = 0 with
/// e = 0.
numerics::SymMatrix Projector(const Eigen::VectorXd& e, double eps_reg);

}  // namespace control
}  // namespace lgpctrl
