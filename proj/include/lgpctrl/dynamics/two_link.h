#pragma once

#include <Eigen/Dense>

#include "lgpctrl/dynamics/el_components.h"

namespace lgpctrl {
namespace dynamics {

/// Planar two-link arm made of uniform rods (center of mass at mid-length,
/// inertia m l²/12 about it), relative joint angles, gravity along +x and
/// damping D(q̇) = d₁I + d₂ diag(|q̇|).
struct TwoLinkParams {
  double m1{1.0};
  double m2{1.0};
  double l1{1.0};
  double l2{1.0};
  double gravity{10.0};
  double d1{1.0};
  double d2{1.0};
};

/// Relative biases χₙ applied as m̂ = (1+χ)m, l̂ = (1+χ)l, d̂ = (1−χ)d, where
/// χ₁ applies to link/damper 1 and χ₂ to link/damper 2.
TwoLinkParams BiasedTwoLinkParams(const TwoLinkParams& p, double chi1,
                                  double chi2);

class TwoLink final : public LagrangianModel {
 public:
  /// @throws InputError unless all parameters are positive (damping ≥ 0).
  explicit TwoLink(const TwoLinkParams& p);

  int dof() const override { return 2; }
  const TwoLinkParams& params() const { return p_; }

  ElComponents Components(const Eigen::VectorXd& q,
                          const Eigen::VectorXd& dq) const override;
  Eigen::MatrixXd MassMatrix(const Eigen::VectorXd& q) const override;
  Eigen::VectorXd PotentialForce(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd Damping(const Eigen::VectorXd& dq) const override;
  double Potential(const Eigen::VectorXd& q) const override;

 private:
  TwoLinkParams p_;
  double alpha_, beta_, delta_;  // inertia constants
  double g1_, g2_;               // gravity moments
};

}  // namespace dynamics
}  // namespace lgpctrl
