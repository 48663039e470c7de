#include "lgpctrl/lgp/model.h"

#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace lgp {

using dynamics::ElComponents;

LgpModel::LgpModel(TrainingSet ts, const Hyperparams& h,
                   std::shared_ptr<const dynamics::LagrangianModel> prior)
    : ts_(std::move(ts)), kernel_(h), prior_(std::move(prior)) {
  Prepare();
  Eigen::VectorXd r(d_ * n_);
  for (int i = 0; i < d_; ++i) {
    r.segment(i * n_, n_) = ts_.y.row(i).transpose() - PriorTau(ts_.input(i));
  }
  w_ = factor_->Solve(r);
  Prepare();
}

LgpModel::LgpModel(TrainingSet ts, const Hyperparams& h,
                   std::shared_ptr<const dynamics::LagrangianModel> prior,
                   const Eigen::VectorXd& weights)
    : ts_(std::move(ts)), kernel_(h), prior_(std::move(prior)), w_(weights) {
  Prepare();
}

// Called once before and once after the weights are known: the first call
// builds the factor, the second caches weight contractions.
void LgpModel::Prepare() {
  if (!factor_) {
    ts_.Validate();
    n_ = ts_.dof();
    d_ = ts_.size();
    if (kernel_.dof() != n_) throw InputError("LgpModel: dof mismatch");
    if (prior_ && prior_->dof() != n_) {
      throw InputError("LgpModel: prior dof mismatch");
    }
    ops_.clear();
    for (int i = 0; i < d_; ++i) ops_.push_back(kernel_.Ops(ts_.input(i)));
    factor_ = std::make_unique<numerics::CholeskyFactor>(numerics::CholFactor(
        Gram(ts_, kernel_.hyperparams(), prior_.get()),
        numerics::JitterPolicy::kLadder));
  }
  if (w_.size() == 0) return;
  if (w_.size() != d_ * n_) throw InputError("LgpModel: weight size mismatch");

  const int nn = n_ * n_;
  const bool elastic = kernel_.hyperparams().elastic;
  kin_s_.resize(d_, nn);
  kin_t_.assign(d_, std::vector<SmallVec>(nn));
  if (elastic) {
    el_s_.resize(d_, nn);
    el_t_.assign(d_, std::vector<SmallVec>(nn));
  }
  for (int i = 0; i < d_; ++i) {
    const Eigen::VectorXd wi = w_.segment(i * n_, n_);
    for (int ab = 0; ab < nn; ++ab) {
      kin_s_(i, ab) = ops_[i].kin_u[ab].dot(wi);
      kin_t_[i][ab] = ops_[i].kin_v[ab].transpose() * wi;
      if (elastic) {
        el_s_(i, ab) = ops_[i].el_u[ab].dot(wi);
        el_t_[i][ab] = ops_[i].el_v[ab].transpose() * wi;
      }
    }
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n_);
  double u0 = 0.0;
  if (elastic) ElasticResidual(zero, &u0, nullptr);
  potential_offset_ = GravityPotentialResidual(zero) + u0;
}

Eigen::VectorXd LgpModel::PriorTau(const FullState& x) const {
  if (!prior_) return Eigen::VectorXd::Zero(n_);
  return dynamics::InverseDynamics(prior_->Components(x.q, x.dq), x.dq, x.ddq);
}

Eigen::VectorXd LgpModel::PredictTau(const FullState& x) const {
  const PointOps op = kernel_.Ops(x);
  Eigen::VectorXd tau = PriorTau(x);
  for (int i = 0; i < d_; ++i) {
    tau.noalias() += kernel_.Block(op, ops_[i]) * w_.segment(i * n_, n_);
  }
  return tau;
}

numerics::SymMatrix LgpModel::PredictCov(const FullState& x) const {
  const PointOps op = kernel_.Ops(x);
  Eigen::MatrixXd kx(d_ * n_, n_);
  for (int i = 0; i < d_; ++i) {
    kx.block(i * n_, 0, n_, n_) = kernel_.Block(ops_[i], op);
  }
  const Eigen::MatrixXd v = factor_->SolveLower(kx);
  const numerics::SymMatrix cov(kernel_.Block(op, op) - v.transpose() * v);
  const numerics::SpectralDecomp eig = numerics::SymEig(cov);
  if (eig.eigenvalues(0) >= 0.0) return cov;
  const Eigen::VectorXd clamped = eig.eigenvalues.cwiseMax(0.0);
  return numerics::SymMatrix(eig.eigenvectors * clamped.asDiagonal() *
                             eig.eigenvectors.transpose());
}

void LgpModel::QuadraticPosterior(const Eigen::VectorXd& q, bool elastic,
                                  Eigen::MatrixXd* f,
                                  std::vector<Eigen::MatrixXd>* df) const {
  const Hyperparams& h = kernel_.hyperparams();
  const Eigen::MatrixXd& wts = elastic ? kernel_.el_weights() : kernel_.kin_weights();
  const Eigen::VectorXd& lambda =
      elastic ? kernel_.el_lambda() : kernel_.kin_lambda();
  const Eigen::MatrixXd& s = elastic ? el_s_ : kin_s_;
  const auto& t = elastic ? el_t_ : kin_t_;
  f->setZero(n_, n_);
  if (df) df->assign(n_, Eigen::MatrixXd::Zero(n_, n_));
  for (int i = 0; i < d_; ++i) {
    const SeTerms rho = SeKernel(q, ts_.q.row(i).transpose(), lambda, 1.0,
                                 h.symmetric);
    for (int a = 0; a < n_; ++a) {
      for (int b = 0; b < n_; ++b) {
        const int ab = a * n_ + b;
        const double sab = s(i, ab);
        const SmallVec& tab = t[i][ab];
        (*f)(a, b) += rho.k * sab + rho.grad_qp.dot(tab);
        if (df) {
          const SmallVec g = rho.grad_q * sab + rho.cross * tab;
          for (int l = 0; l < n_; ++l) (*df)[l](a, b) += g(l);
        }
      }
    }
  }
  f->array() *= wts.array();
  if (df) {
    for (auto& m : *df) m.array() *= wts.array();
  }
}

void LgpModel::MassResidual(const Eigen::VectorXd& q, Eigen::MatrixXd* m,
                            std::vector<Eigen::MatrixXd>* dm) const {
  Eigen::MatrixXd f;
  QuadraticPosterior(q, false, &f, dm);
  *m = f + f.transpose();
  if (dm) {
    for (auto& d : *dm) d += d.transpose().eval();
  }
}

double LgpModel::GravityPotentialResidual(const Eigen::VectorXd& q) const {
  const Hyperparams& h = kernel_.hyperparams();
  double g = 0.0;
  for (int i = 0; i < d_; ++i) {
    const SeTerms k = SeKernel(q, ts_.q.row(i).transpose(), kernel_.grav_lambda(),
                               h.grav_amp * h.grav_amp, h.symmetric);
    g += k.grad_qp.dot(w_.segment(i * n_, n_));
  }
  return g;
}

Eigen::VectorXd LgpModel::GravityForceResidual(const Eigen::VectorXd& q) const {
  const Hyperparams& h = kernel_.hyperparams();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < d_; ++i) {
    const SeTerms k = SeKernel(q, ts_.q.row(i).transpose(), kernel_.grav_lambda(),
                               h.grav_amp * h.grav_amp, h.symmetric);
    g.noalias() += k.cross * w_.segment(i * n_, n_);
  }
  return g;
}

void LgpModel::ElasticResidual(const Eigen::VectorXd& q, double* u,
                               Eigen::VectorXd* force) const {
  Eigen::MatrixXd f;
  std::vector<Eigen::MatrixXd> df;
  QuadraticPosterior(q, true, &f, force ? &df : nullptr);
  // U = Σ_ab q_a q_b f_ab; ∇U = Σ_ab (∇(q_a q_b) f_ab + q_a q_b ∇f_ab).
  if (u) *u = q.dot(f * q);
  if (force) {
    *force = (f + f.transpose()) * q;
    for (int l = 0; l < n_; ++l) (*force)(l) += q.dot(df[l] * q);
  }
}

Eigen::VectorXd LgpModel::DissipationResidual(const Eigen::VectorXd& dq) const {
  const Hyperparams& h = kernel_.hyperparams();
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < d_; ++i) {
    for (int j = 0; j < n_; ++j) {
      const double r = dq(j) - ts_.dq(i, j);
      const double l = h.diss_length(j);
      delta(j) += h.diss_amp(j) * h.diss_amp(j) *
                  std::exp(-0.5 * r * r / (l * l)) * ts_.dq(i, j) *
                  w_(i * n_ + j);
    }
  }
  return delta;
}

Eigen::MatrixXd LgpModel::MassMatrix(const Eigen::VectorXd& q) const {
  Eigen::MatrixXd m;
  MassResidual(q, &m, nullptr);
  if (prior_) m += prior_->MassMatrix(q);
  return m;
}

Eigen::VectorXd LgpModel::PotentialForce(const Eigen::VectorXd& q) const {
  Eigen::VectorXd g = GravityForceResidual(q);
  if (kernel_.hyperparams().elastic) {
    Eigen::VectorXd ge;
    ElasticResidual(q, nullptr, &ge);
    g += ge;
  }
  if (prior_) g += prior_->PotentialForce(q);
  return g;
}

Eigen::MatrixXd LgpModel::Damping(const Eigen::VectorXd& dq) const {
  Eigen::MatrixXd d = DissipationResidual(dq).asDiagonal();
  if (prior_) d += prior_->Damping(dq);
  return d;
}

double LgpModel::Potential(const Eigen::VectorXd& q) const {
  double v = GravityPotentialResidual(q) - potential_offset_;
  if (kernel_.hyperparams().elastic) {
    double u = 0.0;
    ElasticResidual(q, &u, nullptr);
    v += u;
  }
  if (prior_) v += prior_->Potential(q);
  return v;
}

Energies LgpModel::PredictEnergies(const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& dq) const {
  return {0.5 * dq.dot(MassMatrix(q) * dq), Potential(q)};
}

ElComponents LgpModel::Components(const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& dq) const {
  if (q.size() != n_ || dq.size() != n_) {
    throw InputError("LgpModel: state dimension mismatch");
  }
  Eigen::MatrixXd m;
  std::vector<Eigen::MatrixXd> dm;
  MassResidual(q, &m, &dm);
  // Christoffel symbols of the learned mass residual.
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_, n_);
  Eigen::MatrixXd mdot = Eigen::MatrixXd::Zero(n_, n_);
  for (int k = 0; k < n_; ++k) mdot += dm[k] * dq(k);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      double s = 0.0;
      for (int k = 0; k < n_; ++k) s += (dm[j](i, k) - dm[i](k, j)) * dq(k);
      c(i, j) = 0.5 * (mdot(i, j) + s);
    }
  }
  ElComponents out;
  if (prior_) {
    out = prior_->Components(q, dq);
    out.M += m;
    out.C += c;
  } else {
    out.M = m;
    out.C = c;
    out.g = Eigen::VectorXd::Zero(n_);
    out.D = Eigen::MatrixXd::Zero(n_, n_);
  }
  out.g += GravityForceResidual(q);
  if (kernel_.hyperparams().elastic) {
    Eigen::VectorXd ge;
    ElasticResidual(q, nullptr, &ge);
    out.g += ge;
  }
  out.D.diagonal() += DissipationResidual(dq);
  out.d = out.D * dq;
  return out;
}

std::unique_ptr<LgpModel> Fit(
    const TrainingSet& ts, const Hyperparams& h,
    std::shared_ptr<const dynamics::LagrangianModel> prior) {
  return std::make_unique<LgpModel>(ts, h, std::move(prior));
}

}  // namespace lgp
}  // namespace lgpctrl
