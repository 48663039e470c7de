#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "lgpctrl/dynamics/el_components.h"
#include "lgpctrl/lgp/kernels.h"
#include "lgpctrl/numerics/linalg.h"

namespace lgpctrl {
namespace lgp {

/// Posterior energies at a configuration.
struct Energies {
  double kinetic{0.0};
  /// Gravity plus elastic potential, normalized so that it vanishes at q = 0.
  double potential{0.0};
};

/// The Lagrangian-GP posterior. The prior mean is a parametric model (may be
/// null for a zero prior); the GP learns the residual torque.
class LgpModel final : public dynamics::LagrangianModel {
 public:
  /// Fits w = (K(X,X) + Σ_ε)⁻¹ vec(Y − prior(X)).
  /// @throws DecompositionError if the Gram matrix cannot be factored.
  LgpModel(TrainingSet ts, const Hyperparams& h,
           std::shared_ptr<const dynamics::LagrangianModel> prior);

  /// Rebuilds a model with a stored weight vector (used when loading).
  LgpModel(TrainingSet ts, const Hyperparams& h,
           std::shared_ptr<const dynamics::LagrangianModel> prior,
           const Eigen::VectorXd& weights);

  int dof() const override { return n_; }
  const TrainingSet& training_set() const { return ts_; }
  const Hyperparams& hyperparams() const { return kernel_.hyperparams(); }
  const Eigen::VectorXd& weights() const { return w_; }
  double jitter() const { return factor_->jitter(); }
  const dynamics::LagrangianModel* prior() const { return prior_.get(); }
  std::shared_ptr<const dynamics::LagrangianModel> prior_ptr() const {
    return prior_;
  }

  /// prior(x) + K(x, X) w.
  Eigen::VectorXd PredictTau(const FullState& x) const;

  /// K(x,x) − K(x,X)(K(X,X)+Σ_ε)⁻¹K(X,x), symmetrized, negative eigenvalues
  /// clamped to zero.
  numerics::SymMatrix PredictCov(const FullState& x) const;

  dynamics::ElComponents Components(const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& dq) const override;
  Eigen::MatrixXd MassMatrix(const Eigen::VectorXd& q) const override;
  Eigen::VectorXd PotentialForce(const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd Damping(const Eigen::VectorXd& dq) const override;
  double Potential(const Eigen::VectorXd& q) const override;

  Energies PredictEnergies(const Eigen::VectorXd& q,
                           const Eigen::VectorXd& dq) const;

  /// Learned part of the mass matrix and its partial derivatives ∂M/∂q_l.
  void MassResidual(const Eigen::VectorXd& q, Eigen::MatrixXd* m,
                    std::vector<Eigen::MatrixXd>* dm) const;

 private:
  void Prepare();
  Eigen::VectorXd PriorTau(const FullState& x) const;
  // Learned quadratic-form function values f̂_ab(q) and gradients.
  void QuadraticPosterior(const Eigen::VectorXd& q, bool elastic,
                          Eigen::MatrixXd* f,
                          std::vector<Eigen::MatrixXd>* df) const;
  double GravityPotentialResidual(const Eigen::VectorXd& q) const;
  Eigen::VectorXd GravityForceResidual(const Eigen::VectorXd& q) const;
  void ElasticResidual(const Eigen::VectorXd& q, double* u,
                       Eigen::VectorXd* force) const;
  Eigen::VectorXd DissipationResidual(const Eigen::VectorXd& dq) const;

  TrainingSet ts_;
  TorqueKernel kernel_;
  std::shared_ptr<const dynamics::LagrangianModel> prior_;
  int n_;
  int d_;
  std::vector<PointOps> ops_;
  std::unique_ptr<numerics::CholeskyFactor> factor_;
  Eigen::VectorXd w_;
  // Contractions of the training operators with the weights, per point and
  // pair (a, b): s = u·w_n, t = Vᵀw_n.
  Eigen::MatrixXd kin_s_;              // d × N²
  std::vector<std::vector<SmallVec>> kin_t_;
  Eigen::MatrixXd el_s_;
  std::vector<std::vector<SmallVec>> el_t_;
  double potential_offset_{0.0};
};

/// Convenience wrapper for LgpModel construction.
std::unique_ptr<LgpModel> Fit(const TrainingSet& ts, const Hyperparams& h,
                              std::shared_ptr<const dynamics::LagrangianModel> prior);

}  // namespace lgp
}  // namespace lgpctrl
