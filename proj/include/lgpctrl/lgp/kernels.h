#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lgpctrl/dynamics/el_components.h"
#include "lgpctrl/numerics/linalg.h"

namespace lgpctrl {
namespace lgp {

/// Stack-backed small dense types for per-point kernel work (N ≤ 16).
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;

/// Input of the torque GP: configuration, velocity and acceleration.
struct FullState {
  Eigen::VectorXd q;
  Eigen::VectorXd dq;
  Eigen::VectorXd ddq;
};

/// Observations y = τ(q, q̇, q̈ + α) + θ with θ ~ N(0, σ_τ²I) and acceleration
/// noise α ~ N(0, σ_α²I). Rows are samples.
struct TrainingSet {
  Eigen::MatrixXd q;
  Eigen::MatrixXd dq;
  Eigen::MatrixXd ddq;
  Eigen::MatrixXd y;
  double torque_noise_std{0.0};
  double accel_noise_std{0.0};

  int size() const { return static_cast<int>(q.rows()); }
  int dof() const { return static_cast<int>(q.cols()); }
  FullState input(int i) const {
    return {q.row(i).transpose(), dq.row(i).transpose(),
            ddq.row(i).transpose()};
  }
  /// @throws InputError if the row counts or widths disagree.
  void Validate() const;
};

/// Kernel hyperparameters.
///
/// Kinetic energy T = Σ_ab q̇_a q̇_b f_ab(q) with independent f_ab whose
/// covariance is ¼P_ab ρ(q, q′), P = SᵀS, S upper triangular with diagonal
/// `kin_diag` and off-diagonal entries of row k equal to `kin_offdiag(k)`,
/// ρ = exp(−‖q − q′‖²/σ_T²).
///
/// Gravity potential G(q) with SE covariance amplitude `grav_amp`² and
/// per-coordinate lengths `grav_length`.
///
/// Elastic potential U = Σ_ab q_a q_b u_ab(q), built like the kinetic part.
///
/// Dissipation D = diag(δ(q̇)), δ_i an SE GP over q̇_i.
///
/// With `symmetric` set, every configuration kernel k(q, q′) becomes
/// k(q, q′) + k(q, −q′), which makes potentials even and forces odd.
struct Hyperparams {
  Eigen::VectorXd kin_diag;
  Eigen::VectorXd kin_offdiag;
  double kin_length{1.0};
  double grav_amp{1.0};
  Eigen::VectorXd grav_length;
  bool elastic{false};
  Eigen::VectorXd el_diag;
  Eigen::VectorXd el_offdiag;
  double el_length{1.0};
  Eigen::VectorXd diss_amp;
  Eigen::VectorXd diss_length;
  bool symmetric{false};

  /// Unit-scale defaults for an N-dof system.
  static Hyperparams Default(int dof, bool elastic = false,
                             bool symmetric = false);

  int dof() const { return static_cast<int>(kin_diag.size()); }

  /// @throws InputError on negative amplitudes, non-positive lengths or
  /// size mismatches.
  void Validate() const;

  /// Log of every amplitude and length, in a fixed order.
  Eigen::VectorXd ToLog() const;
  /// Inverse of ToLog; structure (dof, flags) is taken from `shape`.
  static Hyperparams FromLog(const Eigen::VectorXd& v, const Hyperparams& shape);
};

/// Per-point quantities of the torque operator, cached for training inputs.
struct PointOps {
  FullState x;
  // Kinetic operator per (a, b): τ = u f + V ∇f.
  std::vector<SmallVec> kin_u;
  std::vector<SmallMat> kin_v;
  // Elastic operator per (a, b).
  std::vector<SmallVec> el_u;
  std::vector<SmallMat> el_v;
};

/// Evaluates the composite torque covariance
///   ℒℒ′ᵀ(k_T + k_G + k_U) + diag(q̇) K_d diag(q̇′)
/// with analytic derivatives.
class TorqueKernel {
 public:
  explicit TorqueKernel(const Hyperparams& h);

  const Hyperparams& hyperparams() const { return h_; }
  int dof() const { return n_; }

  PointOps Ops(const FullState& x) const;

  /// N×N covariance block Cov(τ(x), τ(x′)).
  Eigen::MatrixXd Block(const PointOps& x, const PointOps& xp) const;

  /// Kinetic weight matrix ¼P.
  const Eigen::MatrixXd& kin_weights() const { return kin_w_; }
  const Eigen::MatrixXd& el_weights() const { return el_w_; }
  const Eigen::VectorXd& kin_lambda() const { return kin_lambda_; }
  const Eigen::VectorXd& grav_lambda() const { return grav_lambda_; }
  const Eigen::VectorXd& el_lambda() const { return el_lambda_; }

 private:
  Hyperparams h_;
  int n_;
  Eigen::MatrixXd kin_w_;
  Eigen::MatrixXd el_w_;
  Eigen::VectorXd kin_lambda_;
  Eigen::VectorXd grav_lambda_;
  Eigen::VectorXd el_lambda_;
};

/// Squared-exponential kernel amp²·exp(−½ rᵀΛr) (r = q − q′), plus the
/// mirrored term with r = q + q′ when `symmetric`. Λ = diag(lambda).
struct SeTerms {
  double k{0.0};
  SmallVec grad_q;    // ∂k/∂q
  SmallVec grad_qp;   // ∂k/∂q′
  SmallMat cross;     // ∂²k/∂q∂q′ᵀ
};

SeTerms SeKernel(const Eigen::Ref<const Eigen::VectorXd>& q,
                 const Eigen::Ref<const Eigen::VectorXd>& qp,
                 const Eigen::VectorXd& lambda, double amp2, bool symmetric);

/// Cov(τ(x), τ(x′)).
Eigen::MatrixXd KernelTau(const FullState& x, const FullState& xp,
                          const Hyperparams& h);

/// Noise covariance of one observation: σ_τ²I + σ_α² M_p M_pᵀ (the
/// acceleration noise enters through the prior mass matrix, if any).
Eigen::MatrixXd ObservationNoise(const TrainingSet& ts, int i,
                                 const dynamics::LagrangianModel* prior);

/// (D·N)×(D·N) Gram matrix K(X, X) + Σ_ε.
numerics::SymMatrix Gram(const TrainingSet& ts, const Hyperparams& h,
                         const dynamics::LagrangianModel* prior);

}  // namespace lgp
}  // namespace lgpctrl
