#include "lgpctrl/control/reference.h"

#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace control {

Reference::Reference(Fn q, Fn dq, Fn ddq)
    : q_(std::move(q)), dq_(std::move(dq)), ddq_(std::move(ddq)) {
  if (!q_ || !dq_ || !ddq_) throw InputError("Reference: empty function");
  dof_ = static_cast<int>(q_(0.0).size());
  constexpr double kH = 1e-4;
  constexpr double kTol = 1e-6;
  for (double t : {0.0, 0.37, 1.1, 2.9, 7.3}) {
    const Eigen::VectorXd v = dq_(t);
    const Eigen::VectorXd a = ddq_(t);
    if (q_(t).size() != dof_ || v.size() != dof_ || a.size() != dof_) {
      throw InputError("Reference: inconsistent dimensions");
    }
    const Eigen::VectorXd fd_v = (q_(t + kH) - q_(t - kH)) / (2 * kH);
    const Eigen::VectorXd fd_a = (dq_(t + kH) - dq_(t - kH)) / (2 * kH);
    if ((fd_v - v).norm() > kTol * (1.0 + v.norm()) ||
        (fd_a - a).norm() > kTol * (1.0 + a.norm())) {
      throw InputError("Reference: derivatives inconsistent at t = " +
                       std::to_string(t));
    }
  }
}

Reference Reference::Sine(const Eigen::VectorXd& amplitude, double omega) {
  if (!amplitude.allFinite() || !std::isfinite(omega)) {
    throw InputError("Reference: non-finite sine parameters");
  }
  const Eigen::VectorXd a = amplitude;
  return Reference(
      [a, omega](double t) -> Eigen::VectorXd { return a * std::sin(omega * t); },
      [a, omega](double t) -> Eigen::VectorXd {
        return a * (omega * std::cos(omega * t));
      },
      [a, omega](double t) -> Eigen::VectorXd {
        return a * (-omega * omega * std::sin(omega * t));
      });
}

}  // namespace control
}  // namespace lgpctrl
