#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgpctrl/control/gain_adaptation.h"
#include "lgpctrl/control/reference.h"
#include "lgpctrl/dynamics/el_components.h"
#include "lgpctrl/dynamics/fem_rod.h"
#include "lgpctrl/dynamics/integrator.h"
#include "lgpctrl/lgp/model.h"

namespace lgpctrl {
namespace control {

enum class ControllerKind { kPdp, kNatPdp, kVarNatPdp };

/// "pdp", "nat_pdp", "var_nat_pdp".
std::string ToString(ControllerKind kind);
/// Accepts the names above, with '-' or '_' as separator.
/// @throws InputError for unknown names.
ControllerKind ParseControllerKind(const std::string& name);

struct ControllerSpec {
  ControllerKind kind{ControllerKind::kPdp};
  /// Parametric estimate or learned model. var_nat_pdp requires an LgpModel.
  std::shared_ptr<const dynamics::LagrangianModel> model;
  Eigen::MatrixXd kp;
  Eigen::MatrixXd kd;
  /// Added on top of kp and kd for var_nat_pdp.
  std::optional<GainAdaptation> adaptation;
  double eps_reg{1e-3};

  /// @throws InputError on non-SPD gains, eps_reg <= 0, size mismatches, or a
  /// var_nat_pdp spec without adaptation or without a learned model.
  void Validate() const;
};

/// M̂q̈_d + Ĉq̇_d + ĝ(q) + D̂(q̇)q̇ − K_P e − K_D ė with e = q − q_d.
Eigen::VectorXd PdpTorque(const dynamics::LagrangianModel& model,
                          const Reference& ref, double t,
                          const dynamics::JointState& s,
                          const Eigen::MatrixXd& kp, const Eigen::MatrixXd& kd);

/// Structure-preserving PD+:
///   M̂q̈_d + Ĉq̇_d + (I − h(eᵀĝ)P_e)ĝ − ĝ(e) − K_P e
///     + (I − h(ėᵀd̂)P_ė)d̂ − d̂(ė) − K_D ė,
/// with ĝ = ĝ(q), d̂ = D̂(q̇)q̇ and regularized projectors.
Eigen::VectorXd NatPdpTorque(const dynamics::LagrangianModel& model,
                             const Reference& ref, double t,
                             const dynamics::JointState& s,
                             const Eigen::MatrixXd& kp,
                             const Eigen::MatrixXd& kd, double eps_reg);

/// Per-step controller internals kept for certification.
struct GainSample {
  double t{0.0};
  Eigen::MatrixXd kp;
  Eigen::MatrixXd kd;
  /// Posterior torque covariance and its backward difference (var_nat_pdp
  /// only; empty otherwise).
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd sigma_dot;
};

/// Closed-loop tracking controller. For var_nat_pdp the posterior covariance
/// is queried at (q, q̇, q̈̂), where q̈̂ is the model's forward dynamics under
/// the previous torque (q̈_d(t₀) at the first step).
class TrackingController final : public dynamics::Controller {
 public:
  TrackingController(ControllerSpec spec, Reference ref);

  Eigen::VectorXd Compute(double t, const dynamics::JointState& s,
                          dynamics::StepRecord* record) override;
  void Reset() override;

  const ControllerSpec& spec() const { return spec_; }
  const Reference& reference() const { return ref_; }
  /// One entry per step that was asked for a record.
  const std::vector<GainSample>& log() const { return log_; }
  /// Steps at which M̂ was not positive definite for the acceleration estimate.
  int mass_warnings() const { return mass_warnings_; }

 private:
  ControllerSpec spec_;
  Reference ref_;
  const lgp::LgpModel* lgp_{nullptr};
  std::vector<GainSample> log_;
  Eigen::VectorXd prev_tau_;
  Eigen::MatrixXd prev_sigma_;
  double prev_t_{0.0};
  int mass_warnings_{0};
};

/// Runs a controller designed in constant-curvature coordinates on the FEM
/// plant: the state is reduced by the CC map and the torque is actuated back.
/// Records are kept in CC coordinates.
class CcAdapter final : public dynamics::Controller {
 public:
  /// `inner` must outlive the adapter.
  CcAdapter(dynamics::CcMap map, dynamics::Controller* inner);

  Eigen::VectorXd Compute(double t, const dynamics::JointState& s,
                          dynamics::StepRecord* record) override;
  void Reset() override { inner_->Reset(); }

 private:
  dynamics::CcMap map_;
  dynamics::Controller* inner_;
};

}  // namespace control
}  // namespace lgpctrl
