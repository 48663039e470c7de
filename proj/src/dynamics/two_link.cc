#include "lgpctrl/dynamics/two_link.h"

#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace dynamics {

TwoLinkParams BiasedTwoLinkParams(const TwoLinkParams& p, double chi1,
                                  double chi2) {
  TwoLinkParams b = p;
  b.m1 = (1.0 + chi1) * p.m1;
  b.m2 = (1.0 + chi2) * p.m2;
  b.l1 = (1.0 + chi1) * p.l1;
  b.l2 = (1.0 + chi2) * p.l2;
  b.d1 = (1.0 - chi1) * p.d1;
  b.d2 = (1.0 - chi2) * p.d2;
  return b;
}

TwoLink::TwoLink(const TwoLinkParams& p) : p_(p) {
  if (!(p.m1 > 0 && p.m2 > 0 && p.l1 > 0 && p.l2 > 0 && p.gravity >= 0 &&
        p.d1 >= 0 && p.d2 >= 0)) {
    throw InputError("TwoLink: parameters must be positive");
  }
  const double r1 = 0.5 * p.l1;
  const double r2 = 0.5 * p.l2;
  const double i1 = p.m1 * p.l1 * p.l1 / 12.0;
  const double i2 = p.m2 * p.l2 * p.l2 / 12.0;
  alpha_ = i1 + i2 + p.m1 * r1 * r1 + p.m2 * (p.l1 * p.l1 + r2 * r2);
  beta_ = p.m2 * p.l1 * r2;
  delta_ = i2 + p.m2 * r2 * r2;
  g1_ = p.gravity * (p.m1 * r1 + p.m2 * p.l1);
  g2_ = p.gravity * p.m2 * r2;
}

Eigen::MatrixXd TwoLink::MassMatrix(const Eigen::VectorXd& q) const {
  if (q.size() != 2) throw InputError("TwoLink: state must be 2-dimensional");
  const double c2 = std::cos(q(1));
  Eigen::MatrixXd m(2, 2);
  m << alpha_ + 2.0 * beta_ * c2, delta_ + beta_ * c2, delta_ + beta_ * c2,
      delta_;
  return m;
}

ElComponents TwoLink::Components(const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& dq) const {
  if (dq.size() != 2) throw InputError("TwoLink: state must be 2-dimensional");
  const double s2 = std::sin(q(1));
  ElComponents c;
  c.M = MassMatrix(q);
  c.C.resize(2, 2);
  c.C << -beta_ * s2 * dq(1), -beta_ * s2 * (dq(0) + dq(1)), beta_ * s2 * dq(0),
      0.0;
  c.g = PotentialForce(q);
  c.D = Damping(dq);
  c.d = c.D * dq;
  return c;
}

Eigen::VectorXd TwoLink::PotentialForce(const Eigen::VectorXd& q) const {
  const double s12 = std::sin(q(0) + q(1));
  return Eigen::Vector2d(g1_ * std::sin(q(0)) + g2_ * s12, g2_ * s12);
}

Eigen::MatrixXd TwoLink::Damping(const Eigen::VectorXd& dq) const {
  return (p_.d1 + p_.d2 * dq.array().abs()).matrix().asDiagonal();
}

double TwoLink::Potential(const Eigen::VectorXd& q) const {
  return g1_ * (1.0 - std::cos(q(0))) + g2_ * (1.0 - std::cos(q(0) + q(1)));
}

}  // namespace dynamics
}  // namespace lgpctrl
