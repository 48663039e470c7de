#pragma once

#include <Eigen/Dense>

namespace lgpctrl {
namespace dynamics {

struct JointState {
  Eigen::VectorXd q;
  Eigen::VectorXd dq;
};

/// Euler-Lagrange terms at one state: M(q)q̈ + C(q,q̇)q̇ + g(q) + d = τ,
/// with d = D(q̇)q̇. M is symmetric by construction; C uses Christoffel
/// symbols so that Ṁ − 2C is skew-symmetric.
struct ElComponents {
  Eigen::MatrixXd M;
  Eigen::MatrixXd C;
  Eigen::VectorXd g;
  Eigen::MatrixXd D;
  Eigen::VectorXd d;
};

/// A model of an Euler-Lagrange system. Implemented by the ground-truth
/// plants, the parametric estimates and the learned model.
class LagrangianModel {
 public:
  virtual ~LagrangianModel() = default;

  virtual int dof() const = 0;

  virtual ElComponents Components(const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& dq) const = 0;

  virtual Eigen::MatrixXd MassMatrix(const Eigen::VectorXd& q) const = 0;

  /// Conservative generalized force ∇V(q) (gravity and elastic terms).
  virtual Eigen::VectorXd PotentialForce(const Eigen::VectorXd& q) const = 0;

  /// Dissipation matrix D(q̇); the dissipative force is D(q̇)q̇.
  virtual Eigen::MatrixXd Damping(const Eigen::VectorXd& dq) const = 0;

  /// Potential energy V(q), normalized to V(0) = 0.
  virtual double Potential(const Eigen::VectorXd& q) const = 0;

  double Kinetic(const Eigen::VectorXd& q, const Eigen::VectorXd& dq) const {
    return 0.5 * dq.dot(MassMatrix(q) * dq);
  }
  double TotalEnergy(const Eigen::VectorXd& q,
                     const Eigen::VectorXd& dq) const {
    return Kinetic(q, dq) + Potential(q);
  }
};

/// Solves M q̈ = τ − C q̇ − g − d for q̈.
/// @throws DecompositionError if M is not positive definite.
Eigen::VectorXd ForwardDynamics(const ElComponents& c, const Eigen::VectorXd& dq,
                                const Eigen::VectorXd& tau);

/// Inverse dynamics τ = M q̈ + C q̇ + g + d.
Eigen::VectorXd InverseDynamics(const ElComponents& c, const Eigen::VectorXd& dq,
                                const Eigen::VectorXd& ddq);

}  // namespace dynamics
}  // namespace lgpctrl
