#include "lgpctrl/dynamics/planar_chain.h"

#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace dynamics {

namespace {

// TᵀXT for T the lower-triangular matrix of ones, via suffix sums.
Eigen::MatrixXd SuffixCongruence(Eigen::MatrixXd x) {
  const int n = static_cast<int>(x.rows());
  for (int j = n - 2; j >= 0; --j) x.col(j) += x.col(j + 1);
  for (int i = n - 2; i >= 0; --i) x.row(i) += x.row(i + 1);
  return x;
}

}  // namespace

PlanarChain::PlanarChain(PlanarChainParams params) : params_(std::move(params)) {
  links_ = static_cast<int>(params_.mass.size());
  if (links_ < 1 || params_.length.size() != links_ ||
      params_.com.size() != links_ || params_.inertia.size() != links_) {
    throw InputError("PlanarChain: per-link parameter sizes differ");
  }
  if (params_.mass.minCoeff() <= 0.0 || params_.length.minCoeff() <= 0.0 ||
      params_.inertia.minCoeff() < 0.0) {
    throw InputError("PlanarChain: masses and lengths must be positive");
  }
  if (params_.coord_map.size() == 0) {
    params_.coord_map = Eigen::MatrixXd::Identity(links_, links_);
  }
  if (params_.coord_map.rows() != links_) {
    throw InputError("PlanarChain: coordinate map must have one row per link");
  }
  dof_ = static_cast<int>(params_.coord_map.cols());
  auto fill = [this](Eigen::VectorXd* v) {
    if (v->size() == 0) *v = Eigen::VectorXd::Zero(dof_);
    if (v->size() != dof_) {
      throw InputError("PlanarChain: joint parameter size must equal dof");
    }
  };
  fill(&params_.stiffness);
  fill(&params_.damping_linear);
  fill(&params_.damping_quadratic);

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(links_, links_);
  for (int i = 0; i < links_; ++i) t.row(i).head(i + 1).setOnes();
  b_ = t * params_.coord_map;
  identity_map_ =
      params_.coord_map.isIdentity(0.0) && params_.coord_map.rows() == dof_;

  // c(k, s): lever arm of joint s for link k's center of mass.
  auto lever = [this](int k, int s) {
    return s < k ? params_.length(s) : params_.com(k);
  };
  a_ = Eigen::MatrixXd::Zero(links_, links_);
  grav_ = Eigen::VectorXd::Zero(links_);
  for (int s = 0; s < links_; ++s) {
    for (int t2 = 0; t2 < links_; ++t2) {
      double sum = 0.0;
      for (int k = std::max(s, t2); k < links_; ++k) {
        sum += params_.mass(k) * lever(k, s) * lever(k, t2);
      }
      a_(s, t2) = sum;
    }
    double gs = 0.0;
    for (int k = s; k < links_; ++k) gs += params_.mass(k) * lever(k, s);
    grav_(s) = params_.gravity * gs;
  }
}

Eigen::VectorXd PlanarChain::AbsoluteAngles(const Eigen::VectorXd& q) const {
  if (q.size() != dof_) throw InputError("PlanarChain: wrong state dimension");
  return b_ * q;
}

Eigen::Matrix2Xd PlanarChain::ComPositions(const Eigen::VectorXd& q) const {
  const Eigen::VectorXd th = AbsoluteAngles(q);
  Eigen::Matrix2Xd p(2, links_);
  Eigen::Vector2d joint = Eigen::Vector2d::Zero();
  for (int k = 0; k < links_; ++k) {
    const Eigen::Vector2d dir(std::cos(th(k)), std::sin(th(k)));
    p.col(k) = joint + params_.com(k) * dir;
    joint += params_.length(k) * dir;
  }
  return p;
}

Eigen::MatrixXd PlanarChain::MassMatrix(const Eigen::VectorXd& q) const {
  const Eigen::VectorXd th = AbsoluteAngles(q);
  const Eigen::ArrayXd cs = th.array().cos();
  const Eigen::ArrayXd sn = th.array().sin();
  Eigen::MatrixXd h = (cs.matrix() * cs.matrix().transpose() +
                       sn.matrix() * sn.matrix().transpose())
                          .cwiseProduct(a_);
  h.diagonal() += params_.inertia;
  return Congruence(h);
}

Eigen::MatrixXd PlanarChain::Congruence(const Eigen::MatrixXd& x) const {
  if (identity_map_) return SuffixCongruence(x);
  const Eigen::MatrixXd& a = params_.coord_map;
  return a.transpose() * SuffixCongruence(x) * a;
}

ElComponents PlanarChain::Components(const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& dq) const {
  if (dq.size() != dof_) throw InputError("PlanarChain: wrong state dimension");
  const Eigen::VectorXd th = AbsoluteAngles(q);
  const Eigen::VectorXd w = b_ * dq;
  const Eigen::VectorXd cs = th.array().cos().matrix();
  const Eigen::VectorXd sn = th.array().sin().matrix();
  // cos(θs − θt) and sin(θs − θt).
  const Eigen::MatrixXd cdiff = cs * cs.transpose() + sn * sn.transpose();
  const Eigen::MatrixXd sdiff = sn * cs.transpose() - cs * sn.transpose();

  Eigen::MatrixXd h = cdiff.cwiseProduct(a_);
  h.diagonal() += params_.inertia;
  const Eigen::MatrixXd c_theta = sdiff.cwiseProduct(a_) * w.asDiagonal();

  ElComponents out;
  out.M = Congruence(h);
  out.C = Congruence(c_theta);
  out.g = b_.transpose() * grav_.cwiseProduct(sn) +
          params_.stiffness.cwiseProduct(q);
  out.D = Damping(dq);
  out.d = out.D * dq;
  return out;
}

Eigen::VectorXd PlanarChain::PotentialForce(const Eigen::VectorXd& q) const {
  const Eigen::VectorXd th = AbsoluteAngles(q);
  return b_.transpose() * grav_.cwiseProduct(th.array().sin().matrix()) +
         params_.stiffness.cwiseProduct(q);
}

Eigen::MatrixXd PlanarChain::Damping(const Eigen::VectorXd& dq) const {
  return (params_.damping_linear.array() +
          params_.damping_quadratic.array() * dq.array().abs())
      .matrix()
      .asDiagonal();
}

double PlanarChain::Potential(const Eigen::VectorXd& q) const {
  const Eigen::VectorXd th = AbsoluteAngles(q);
  return grav_.dot((1.0 - th.array().cos()).matrix()) +
         0.5 * q.dot(params_.stiffness.cwiseProduct(q));
}

}  // namespace dynamics
}  // namespace lgpctrl
