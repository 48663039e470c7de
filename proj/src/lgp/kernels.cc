#include "lgpctrl/lgp/kernels.h"

#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace lgp {

void TrainingSet::Validate() const {
  const int d = size();
  const int n = dof();
  if (d < 1 || n < 1 || dq.rows() != d || ddq.rows() != d || y.rows() != d ||
      dq.cols() != n || ddq.cols() != n || y.cols() != n) {
    throw InputError("TrainingSet: inconsistent row counts or widths");
  }
  if (torque_noise_std < 0 || accel_noise_std < 0) {
    throw InputError("TrainingSet: noise levels must be non-negative");
  }
}

Hyperparams Hyperparams::Default(int dof, bool elastic, bool symmetric) {
  Hyperparams h;
  h.kin_diag = Eigen::VectorXd::Ones(dof);
  h.kin_offdiag = Eigen::VectorXd::Constant(std::max(dof - 1, 0), 0.1);
  h.kin_length = 1.0;
  h.grav_amp = 1.0;
  h.grav_length = Eigen::VectorXd::Ones(dof);
  h.elastic = elastic;
  if (elastic) {
    h.el_diag = Eigen::VectorXd::Ones(dof);
    h.el_offdiag = Eigen::VectorXd::Constant(std::max(dof - 1, 0), 0.1);
    h.el_length = 1.0;
  }
  h.diss_amp = Eigen::VectorXd::Ones(dof);
  h.diss_length = Eigen::VectorXd::Ones(dof);
  h.symmetric = symmetric;
  return h;
}

void Hyperparams::Validate() const {
  const int n = dof();
  const int off = std::max(n - 1, 0);
  bool ok = n >= 1 && kin_offdiag.size() == off && grav_length.size() == n &&
            diss_amp.size() == n && diss_length.size() == n;
  if (elastic) ok = ok && el_diag.size() == n && el_offdiag.size() == off;
  if (!ok) throw InputError("Hyperparams: size mismatch");
  auto nonneg = [](const Eigen::VectorXd& v) {
    return v.size() == 0 || (v.allFinite() && v.minCoeff() >= 0.0);
  };
  auto positive = [](const Eigen::VectorXd& v) {
    return v.size() == 0 || (v.allFinite() && v.minCoeff() > 0.0);
  };
  ok = nonneg(kin_diag) && nonneg(kin_offdiag) && kin_length > 0 &&
       grav_amp >= 0 && positive(grav_length) && nonneg(diss_amp) &&
       positive(diss_length);
  if (elastic) ok = ok && nonneg(el_diag) && nonneg(el_offdiag) && el_length > 0;
  if (!ok) {
    throw InputError(
        "Hyperparams: amplitudes must be >= 0 and lengths > 0");
  }
}

Eigen::VectorXd Hyperparams::ToLog() const {
  std::vector<double> v;
  auto push = [&v](const Eigen::VectorXd& x) {
    for (int i = 0; i < x.size(); ++i) v.push_back(std::log(x(i)));
  };
  push(kin_diag);
  push(kin_offdiag);
  v.push_back(std::log(kin_length));
  v.push_back(std::log(grav_amp));
  push(grav_length);
  if (elastic) {
    push(el_diag);
    push(el_offdiag);
    v.push_back(std::log(el_length));
  }
  push(diss_amp);
  push(diss_length);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

Hyperparams Hyperparams::FromLog(const Eigen::VectorXd& v,
                                 const Hyperparams& shape) {
  Hyperparams h = shape;
  int k = 0;
  auto pull = [&](Eigen::VectorXd* x) {
    for (int i = 0; i < x->size(); ++i) (*x)(i) = std::exp(v(k++));
  };
  auto pull1 = [&](double* x) { *x = std::exp(v(k++)); };
  const int expected = static_cast<int>(shape.ToLog().size());
  if (v.size() != expected) throw InputError("Hyperparams: wrong vector size");
  pull(&h.kin_diag);
  pull(&h.kin_offdiag);
  pull1(&h.kin_length);
  pull1(&h.grav_amp);
  pull(&h.grav_length);
  if (h.elastic) {
    pull(&h.el_diag);
    pull(&h.el_offdiag);
    pull1(&h.el_length);
  }
  pull(&h.diss_amp);
  pull(&h.diss_length);
  return h;
}

namespace {

// ¼SᵀS for S upper triangular with the given diagonal and row-shared
// off-diagonal amplitude.
Eigen::MatrixXd QuarterGram(const Eigen::VectorXd& diag,
                            const Eigen::VectorXd& offdiag) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    s(k, k) = diag(k);
    for (int l = k + 1; l < n; ++l) s(k, l) = offdiag(k);
  }
  return 0.25 * s.transpose() * s;
}

void AddSe(const Eigen::Ref<const Eigen::VectorXd>& r,
           const Eigen::VectorXd& lambda, double amp2, double sign,
           SeTerms* out) {
  const int n = static_cast<int>(r.size());
  SmallVec lr(n);
  double quad = 0.0;
  for (int i = 0; i < n; ++i) {
    lr(i) = lambda(i) * r(i);
    quad += r(i) * lr(i);
  }
  const double k = amp2 * std::exp(-0.5 * quad);
  out->k += k;
  out->grad_q.noalias() -= k * lr;
  out->grad_qp.noalias() += sign * k * lr;
  // sign = +1 for r = q − q′, −1 for s = q + q′.
  out->cross.noalias() -= sign * k * lr * lr.transpose();
  for (int i = 0; i < n; ++i) out->cross(i, i) += sign * k * lambda(i);
}

}  // namespace

SeTerms SeKernel(const Eigen::Ref<const Eigen::VectorXd>& q,
                 const Eigen::Ref<const Eigen::VectorXd>& qp,
                 const Eigen::VectorXd& lambda, double amp2, bool symmetric) {
  const int n = static_cast<int>(q.size());
  SeTerms t;
  t.grad_q.setZero(n);
  t.grad_qp.setZero(n);
  t.cross.setZero(n, n);
  AddSe(q - qp, lambda, amp2, 1.0, &t);
  if (symmetric) AddSe(q + qp, lambda, amp2, -1.0, &t);
  return t;
}

TorqueKernel::TorqueKernel(const Hyperparams& h) : h_(h), n_(h.dof()) {
  h_.Validate();
  kin_w_ = QuarterGram(h_.kin_diag, h_.kin_offdiag);
  kin_lambda_ = Eigen::VectorXd::Constant(n_, 2.0 / (h_.kin_length * h_.kin_length));
  grav_lambda_ = h_.grav_length.array().square().inverse().matrix();
  if (h_.elastic) {
    el_w_ = QuarterGram(h_.el_diag, h_.el_offdiag);
    el_lambda_ =
        Eigen::VectorXd::Constant(n_, 2.0 / (h_.el_length * h_.el_length));
  }
}

PointOps TorqueKernel::Ops(const FullState& x) const {
  const int n = n_;
  if (x.q.size() != n || x.dq.size() != n || x.ddq.size() != n) {
    throw InputError("TorqueKernel: state dimension mismatch");
  }
  PointOps ops;
  ops.x = x;
  ops.kin_u.resize(n * n);
  ops.kin_v.resize(n * n);
  if (h_.elastic) {
    ops.el_u.resize(n * n);
    ops.el_v.resize(n * n);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int ab = a * n + b;
      SmallVec u = SmallVec::Zero(n);
      u(a) += x.ddq(b);
      u(b) += x.ddq(a);
      SmallVec w = SmallVec::Zero(n);
      w(a) += x.dq(b);
      w(b) += x.dq(a);
      SmallMat v = w * x.dq.transpose();
      for (int i = 0; i < n; ++i) v(i, i) -= x.dq(a) * x.dq(b);
      ops.kin_u[ab] = u;
      ops.kin_v[ab] = v;
      if (h_.elastic) {
        SmallVec ue = SmallVec::Zero(n);
        ue(a) += x.q(b);
        ue(b) += x.q(a);
        ops.el_u[ab] = ue;
        ops.el_v[ab] = SmallMat::Identity(n, n) * (x.q(a) * x.q(b));
      }
    }
  }
  return ops;
}

namespace {

// Σ_ab w_ab (u ρ u′ᵀ + u (V′∇′ρ)ᵀ + (V∇ρ) u′ᵀ + V H V′ᵀ).
void AddQuadraticFormBlock(const std::vector<SmallVec>& u,
                           const std::vector<SmallMat>& v,
                           const std::vector<SmallVec>& up,
                           const std::vector<SmallMat>& vp,
                           const Eigen::MatrixXd& w, const SeTerms& rho,
                           Eigen::MatrixXd* block) {
  const int n = static_cast<int>(w.rows());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double wab = w(a, b);
      if (wab == 0.0) continue;
      const int ab = a * n + b;
      const SmallVec vg = v[ab] * rho.grad_q;
      const SmallVec vpg = vp[ab] * rho.grad_qp;
      const SmallMat vh = v[ab] * rho.cross;
      block->noalias() +=
          wab * (rho.k * u[ab] * up[ab].transpose() +
                 u[ab] * vpg.transpose() + vg * up[ab].transpose() +
                 vh * vp[ab].transpose());
    }
  }
}

}  // namespace

Eigen::MatrixXd TorqueKernel::Block(const PointOps& x, const PointOps& xp) const {
  const int n = n_;
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);

  const SeTerms rho =
      SeKernel(x.x.q, xp.x.q, kin_lambda_, 1.0, h_.symmetric);
  AddQuadraticFormBlock(x.kin_u, x.kin_v, xp.kin_u, xp.kin_v, kin_w_, rho,
                        &block);

  const SeTerms kg = SeKernel(x.x.q, xp.x.q, grav_lambda_,
                              h_.grav_amp * h_.grav_amp, h_.symmetric);
  block += kg.cross;

  if (h_.elastic) {
    const SeTerms rho_u =
        SeKernel(x.x.q, xp.x.q, el_lambda_, 1.0, h_.symmetric);
    AddQuadraticFormBlock(x.el_u, x.el_v, xp.el_u, xp.el_v, el_w_, rho_u,
                          &block);
  }

  for (int i = 0; i < n; ++i) {
    const double r = x.x.dq(i) - xp.x.dq(i);
    const double l = h_.diss_length(i);
    block(i, i) += x.x.dq(i) * xp.x.dq(i) * h_.diss_amp(i) * h_.diss_amp(i) *
                   std::exp(-0.5 * r * r / (l * l));
  }
  return block;
}

Eigen::MatrixXd KernelTau(const FullState& x, const FullState& xp,
                          const Hyperparams& h) {
  const TorqueKernel k(h);
  return k.Block(k.Ops(x), k.Ops(xp));
}

Eigen::MatrixXd ObservationNoise(const TrainingSet& ts, int i,
                                 const dynamics::LagrangianModel* prior) {
  const int n = ts.dof();
  Eigen::MatrixXd s = ts.torque_noise_std * ts.torque_noise_std *
                      Eigen::MatrixXd::Identity(n, n);
  if (prior != nullptr && ts.accel_noise_std > 0.0) {
    const Eigen::MatrixXd m = prior->MassMatrix(ts.q.row(i).transpose());
    s += ts.accel_noise_std * ts.accel_noise_std * m * m.transpose();
  }
  return s;
}

numerics::SymMatrix Gram(const TrainingSet& ts, const Hyperparams& h,
                         const dynamics::LagrangianModel* prior) {
  ts.Validate();
  const TorqueKernel k(h);
  if (k.dof() != ts.dof()) throw InputError("Gram: dof mismatch");
  const int d = ts.size();
  const int n = ts.dof();
  std::vector<PointOps> ops;
  ops.reserve(d);
  for (int i = 0; i < d; ++i) ops.push_back(k.Ops(ts.input(i)));
  Eigen::MatrixXd g(d * n, d * n);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const Eigen::MatrixXd b = k.Block(ops[i], ops[j]);
      g.block(i * n, j * n, n, n) = b;
      g.block(j * n, i * n, n, n) = b.transpose();
    }
    g.block(i * n, i * n, n, n) += ObservationNoise(ts, i, prior);
  }
  return numerics::SymMatrix(g);
}

}  // namespace lgp
}  // namespace lgpctrl
