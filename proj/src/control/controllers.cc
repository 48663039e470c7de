#include "lgpctrl/control/controllers.h"

#include <algorithm>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/control/primitives.h"

namespace lgpctrl {
namespace control {

using dynamics::ElComponents;
using dynamics::JointState;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string ToString(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kPdp:
      return "pdp";
    case ControllerKind::kNatPdp:
      return "nat_pdp";
    case ControllerKind::kVarNatPdp:
      return "var_nat_pdp";
  }
  return "";
}

ControllerKind ParseControllerKind(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "pdp") return ControllerKind::kPdp;
  if (n == "nat_pdp") return ControllerKind::kNatPdp;
  if (n == "var_nat_pdp") return ControllerKind::kVarNatPdp;
  throw InputError("unknown controller kind '" + name + "'");
}

namespace {

bool IsSpd(const MatrixXd& k, int n) {
  if (k.rows() != n || k.cols() != n || !k.allFinite()) return false;
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + k.norm())) {
    return false;
  }
  return numerics::MinEigenvalue(numerics::SymMatrix(k)) > 0.0;
}

}  // namespace

void ControllerSpec::Validate() const {
  if (!model) throw InputError("ControllerSpec: missing model");
  const int n = model->dof();
  if (!IsSpd(kp, n) || !IsSpd(kd, n)) {
    throw InputError("ControllerSpec: K_P and K_D must be SPD of size N");
  }
  if (!(eps_reg > 0.0)) throw InputError("ControllerSpec: eps_reg must be > 0");
  if (kind == ControllerKind::kVarNatPdp) {
    if (!adaptation) {
      throw InputError("ControllerSpec: var_nat_pdp needs a gain adaptation");
    }
    if (adaptation->dim() != n) {
      throw InputError("ControllerSpec: adaptation size mismatch");
    }
    if (dynamic_cast<const lgp::LgpModel*>(model.get()) == nullptr) {
      throw InputError("ControllerSpec: var_nat_pdp needs a learned model");
    }
  }
}

namespace {

struct Errors {
  VectorXd e;
  VectorXd de;
};

Errors TrackingErrors(const Reference& ref, double t, const JointState& s) {
  if (s.q.size() != ref.dof() || s.dq.size() != ref.dof()) {
    throw InputError("controller: state and reference sizes differ");
  }
  return {s.q - ref.q(t), s.dq - ref.dq(t)};
}

VectorXd PdpFromComponents(const ElComponents& c, const Reference& ref,
                           double t, const Errors& err, const MatrixXd& kp,
                           const MatrixXd& kd) {
  return c.M * ref.ddq(t) + c.C * ref.dq(t) + c.g + c.d - kp * err.e -
         kd * err.de;
}

VectorXd NatPdpFromComponents(const dynamics::LagrangianModel& model,
                              const ElComponents& c, const Reference& ref,
                              double t, const Errors& err, const MatrixXd& kp,
                              const MatrixXd& kd, double eps_reg) {
  const VectorXd g_par =
      Heaviside(err.e.dot(c.g)) * (Projector(err.e, eps_reg).matrix() * c.g);
  const VectorXd d_par =
      Heaviside(err.de.dot(c.d)) * (Projector(err.de, eps_reg).matrix() * c.d);
  const VectorXd g_err = model.PotentialForce(err.e);
  const VectorXd d_err = model.Damping(err.de) * err.de;
  return c.M * ref.ddq(t) + c.C * ref.dq(t) + (c.g - g_par) - g_err -
         kp * err.e + (c.d - d_par) - d_err - kd * err.de;
}

}  // namespace

VectorXd PdpTorque(const dynamics::LagrangianModel& model, const Reference& ref,
                   double t, const JointState& s, const MatrixXd& kp,
                   const MatrixXd& kd) {
  const Errors err = TrackingErrors(ref, t, s);
  return PdpFromComponents(model.Components(s.q, s.dq), ref, t, err, kp, kd);
}

VectorXd NatPdpTorque(const dynamics::LagrangianModel& model,
                      const Reference& ref, double t, const JointState& s,
                      const MatrixXd& kp, const MatrixXd& kd, double eps_reg) {
  const Errors err = TrackingErrors(ref, t, s);
  return NatPdpFromComponents(model, model.Components(s.q, s.dq), ref, t, err,
                              kp, kd, eps_reg);
}

TrackingController::TrackingController(ControllerSpec spec, Reference ref)
    : spec_(std::move(spec)), ref_(std::move(ref)) {
  spec_.Validate();
  if (ref_.dof() != spec_.model->dof()) {
    throw InputError("TrackingController: reference size mismatch");
  }
  lgp_ = dynamic_cast<const lgp::LgpModel*>(spec_.model.get());
}

void TrackingController::Reset() {
  log_.clear();
  prev_tau_.resize(0);
  prev_sigma_.resize(0, 0);
  prev_t_ = 0.0;
  mass_warnings_ = 0;
}

VectorXd TrackingController::Compute(double t, const JointState& s,
                                     dynamics::StepRecord* record) {
  const Errors err = TrackingErrors(ref_, t, s);
  const ElComponents c = spec_.model->Components(s.q, s.dq);
  GainSample sample;
  sample.t = t;
  sample.kp = spec_.kp;
  sample.kd = spec_.kd;

  if (spec_.kind == ControllerKind::kVarNatPdp) {
    VectorXd ddq_hat = ref_.ddq(t);
    if (prev_tau_.size() != 0) {
      try {
        ddq_hat = dynamics::ForwardDynamics(c, s.dq, prev_tau_);
      } catch (const DecompositionError&) {
        ++mass_warnings_;
      }
    }
    const numerics::SymMatrix sigma =
        lgp_->PredictCov({s.q, s.dq, ddq_hat});
    const MatrixXd k = spec_.adaptation->Gain(sigma).matrix();
    sample.kp += k;
    sample.kd += k;
    sample.sigma = sigma.matrix();
    if (prev_sigma_.size() != 0 && t > prev_t_) {
      sample.sigma_dot = (sample.sigma - prev_sigma_) / (t - prev_t_);
    } else {
      sample.sigma_dot = MatrixXd::Zero(sigma.dim(), sigma.dim());
    }
    prev_sigma_ = sample.sigma;
    prev_t_ = t;
    if (record) {
      const VectorXd ev = numerics::SymEigenvalues(sigma);
      record->sigma_min = ev(0);
      record->sigma_max = ev(ev.size() - 1);
    }
  }

  VectorXd tau;
  if (spec_.kind == ControllerKind::kPdp) {
    tau = PdpFromComponents(c, ref_, t, err, sample.kp, sample.kd);
  } else {
    tau = NatPdpFromComponents(*spec_.model, c, ref_, t, err, sample.kp,
                               sample.kd, spec_.eps_reg);
  }
  prev_tau_ = tau;
  if (record) {
    log_.push_back(std::move(sample));
    record->q = s.q;
    record->dq = s.dq;
    record->e = err.e;
    record->de = err.de;
    record->tau = tau;
  }
  return tau;
}

CcAdapter::CcAdapter(dynamics::CcMap map, dynamics::Controller* inner)
    : map_(std::move(map)), inner_(inner) {
  if (inner_ == nullptr) throw InputError("CcAdapter: null controller");
}

VectorXd CcAdapter::Compute(double t, const JointState& s,
                            dynamics::StepRecord* record) {
  if (s.q.size() != map_.n_elems()) {
    throw InputError("CcAdapter: plant state size mismatch");
  }
  const JointState reduced = map_.Reduce(s);
  dynamics::StepRecord inner_rec;
  const VectorXd tau_cc =
      inner_->Compute(t, reduced, record ? &inner_rec : nullptr);
  if (record) {
    *record = std::move(inner_rec);
    if (record->q.size() == 0) record->q = reduced.q;
    if (record->dq.size() == 0) record->dq = reduced.dq;
    if (record->tau.size() == 0) record->tau = tau_cc;
  }
  return map_.Actuate(tau_cc);
}

}  // namespace control
}  // namespace lgpctrl
