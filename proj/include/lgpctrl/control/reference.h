#pragma once

#include <functional>

#include <Eigen/Dense>

namespace lgpctrl {
namespace control {

/// Desired joint trajectory with its first two derivatives.
class Reference {
 public:
  using Fn = std::function<Eigen::VectorXd(double)>;

  /// Spot-checks dq ≈ d/dt q and ddq ≈ d/dt dq by central differences at a
  /// few times in [0, 10].
  /// @throws InputError on inconsistent sizes or derivatives.
  Reference(Fn q, Fn dq, Fn ddq);

  /// q_d(t) = amplitude ∘ sin(ω t).
  static Reference Sine(const Eigen::VectorXd& amplitude, double omega);

  int dof() const { return dof_; }
  Eigen::VectorXd q(double t) const { return q_(t); }
  Eigen::VectorXd dq(double t) const { return dq_(t); }
  Eigen::VectorXd ddq(double t) const { return ddq_(t); }

 private:
  Fn q_;
  Fn dq_;
  Fn ddq_;
  int dof_;
};

}  // namespace control
}  // namespace lgpctrl
