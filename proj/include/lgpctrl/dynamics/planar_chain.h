#pragma once

#include <Eigen/Dense>

#include "lgpctrl/dynamics/el_components.h"

namespace lgpctrl {
namespace dynamics {

/// Serial planar chain of rigid links with revolute joints. Gravity acts
/// along +x, so the stretched chain along +x (all angles zero) hangs in
/// equilibrium. Relative joint angles are φ = A q for a constant coordinate
/// map A, which lets the same class describe the FEM rod (A = I) and
/// constant-curvature reductions of it.
struct PlanarChainParams {
  Eigen::VectorXd mass;
  Eigen::VectorXd length;
  /// Distance of each link's center of mass from its proximal joint.
  Eigen::VectorXd com;
  /// Rotational inertia of each link about its center of mass.
  Eigen::VectorXd inertia;
  double gravity{0.0};
  /// links × dof. Empty means identity.
  Eigen::MatrixXd coord_map;
  /// Per generalized coordinate; empty means zero.
  Eigen::VectorXd stiffness;
  Eigen::VectorXd damping_linear;
  Eigen::VectorXd damping_quadratic;
};

class PlanarChain final : public LagrangianModel {
 public:
  /// @throws InputError on inconsistent sizes or non-positive masses/lengths.
  explicit PlanarChain(PlanarChainParams params);

  int dof() const override { return dof_; }
  int num_links() const { return links_; }
  const PlanarChainParams& params() const { return params_; }

  ElComponents Components(const Eigen::VectorXd& q,
                          const Eigen::VectorXd& dq) const override;
  Eigen::MatrixXd MassMatrix(const Eigen::VectorXd& q) const override;
  Eigen::VectorXd PotentialForce(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd Damping(const Eigen::VectorXd& dq) const override;
  double Potential(const Eigen::VectorXd& q) const override;

  /// Absolute link angles θ = T A q (T lower-triangular ones).
  Eigen::VectorXd AbsoluteAngles(const Eigen::VectorXd& q) const;

  /// Position of each link's center of mass; column k is link k.
  Eigen::Matrix2Xd ComPositions(const Eigen::VectorXd& q) const;

 private:
  // BᵀXB for θ = Bq.
  Eigen::MatrixXd Congruence(const Eigen::MatrixXd& x) const;

  PlanarChainParams params_;
  bool identity_map_{false};
  int links_{0};
  int dof_{0};
  Eigen::MatrixXd b_;        // θ = b_ q
  Eigen::MatrixXd a_;        // H_st = δ_st I_s + a_st cos(θ_s − θ_t)
  Eigen::VectorXd grav_;     // g0 · Σ_{k≥s} m_k c_ks
};

}  // namespace dynamics
}  // namespace lgpctrl
