#include "lgpctrl/dynamics/fem_rod.h"

#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace dynamics {

FemRodParams RescaledFemRodParams(const FemRodParams& reference, int n_elems) {
  FemRodParams p = reference;
  const double ratio =
      static_cast<double>(n_elems) / static_cast<double>(reference.n_elems);
  p.n_elems = n_elems;
  p.joint_stiffness = reference.joint_stiffness * ratio;
  p.joint_damping = reference.joint_damping * ratio;
  if (reference.element_inertia >= 0.0) {
    p.element_inertia = reference.element_inertia / (ratio * ratio * ratio);
  }
  return p;
}

std::unique_ptr<PlanarChain> MakeFemRod(const FemRodParams& p) {
  if (p.n_elems < 2) throw InputError("MakeFemRod: n_elems must be >= 2");
  if (!(p.total_mass > 0 && p.total_length > 0 && p.joint_stiffness >= 0 &&
        p.joint_damping >= 0)) {
    throw InputError("MakeFemRod: physical parameters must be positive");
  }
  const int n = p.n_elems;
  const double m = p.total_mass / n;
  const double l = p.total_length / n;
  PlanarChainParams c;
  c.mass = Eigen::VectorXd::Constant(n, m);
  c.length = Eigen::VectorXd::Constant(n, l);
  c.com = Eigen::VectorXd::Constant(n, 0.5 * l);
  c.inertia = Eigen::VectorXd::Constant(
      n, p.element_inertia >= 0.0 ? p.element_inertia : m * l * l / 12.0);
  c.gravity = p.gravity_aligned ? p.gravity : 0.0;
  c.stiffness = Eigen::VectorXd::Constant(n, p.joint_stiffness);
  c.damping_linear = Eigen::VectorXd::Constant(n, p.joint_damping);
  return std::make_unique<PlanarChain>(std::move(c));
}

CcMap::CcMap(int n_segments, int n_elems)
    : n_segments_(n_segments), n_elems_(n_elems), segment_(n_elems) {
  if (n_segments < 1 || n_elems < n_segments) {
    throw InputError("CcMap: need 1 <= n_segments <= n_elems");
  }
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n_segments);
  for (int j = 0; j < n_elems; ++j) {
    segment_[j] = static_cast<int>((static_cast<long>(j) * n_segments) / n_elems);
    count(segment_[j]) += 1.0;
  }
  a_ = Eigen::MatrixXd::Zero(n_elems, n_segments);
  for (int j = 0; j < n_elems; ++j) a_(j, segment_[j]) = 1.0 / count(segment_[j]);
  const Eigen::MatrixXd ata = a_.transpose() * a_;
  const Eigen::MatrixXd ata_inv = ata.inverse();
  reduce_ = ata_inv * a_.transpose();
  actuate_ = a_ * ata_inv;
}

Eigen::VectorXd CcMap::ReduceVector(const Eigen::VectorXd& fem) const {
  if (fem.size() != n_elems_) throw InputError("CcMap: wrong FEM dimension");
  return reduce_ * fem;
}

JointState CcMap::Reduce(const JointState& fem) const {
  return {ReduceVector(fem.q), ReduceVector(fem.dq)};
}

Eigen::VectorXd CcMap::Embed(const Eigen::VectorXd& q_cc) const {
  if (q_cc.size() != n_segments_) throw InputError("CcMap: wrong CC dimension");
  return a_ * q_cc;
}

Eigen::VectorXd CcMap::Actuate(const Eigen::VectorXd& tau_cc) const {
  if (tau_cc.size() != n_segments_) {
    throw InputError("CcMap: wrong CC dimension");
  }
  return actuate_ * tau_cc;
}

JointState CcReduce(const CcMap& map, const JointState& fem) {
  return map.Reduce(fem);
}

Eigen::VectorXd CcActuate(const CcMap& map, const Eigen::VectorXd& tau_cc) {
  return map.Actuate(tau_cc);
}

std::unique_ptr<PlanarChain> MakeCcChain(const CcChainParams& p) {
  const int n_seg = static_cast<int>(p.segment_mass.size());
  if (n_seg < 1 || p.sublinks < 1 || p.segment_stiffness.size() != n_seg ||
      p.segment_damping.size() != n_seg) {
    throw InputError("MakeCcChain: inconsistent segment parameters");
  }
  const int k = p.sublinks;
  const int links = n_seg * k;
  const double l = p.total_length / links;
  PlanarChainParams c;
  c.mass.resize(links);
  c.length = Eigen::VectorXd::Constant(links, l);
  c.com = Eigen::VectorXd::Constant(links, 0.5 * l);
  c.inertia.resize(links);
  c.coord_map = Eigen::MatrixXd::Zero(links, n_seg);
  for (int i = 0; i < n_seg; ++i) {
    for (int s = 0; s < k; ++s) {
      const int j = i * k + s;
      c.mass(j) = p.segment_mass(i) / k;
      c.inertia(j) = c.mass(j) * l * l / 12.0;
      c.coord_map(j, i) = 1.0 / k;
    }
  }
  c.gravity = p.gravity;
  c.stiffness = p.segment_stiffness;
  c.damping_linear = p.segment_damping;
  return std::make_unique<PlanarChain>(std::move(c));
}

CcChainParams BiasedCcChainParams(const FemRodParams& rod, int n_segments,
                                  int sublinks, double bias) {
  CcChainParams c;
  c.total_length = rod.total_length;
  c.gravity = rod.gravity_aligned ? rod.gravity : 0.0;
  c.sublinks = sublinks;
  c.segment_mass.resize(n_segments);
  c.segment_stiffness.resize(n_segments);
  c.segment_damping.resize(n_segments);
  const double ratio = static_cast<double>(n_segments) / rod.n_elems;
  for (int i = 0; i < n_segments; ++i) {
    const double chi = (i % 2 == 0 ? 1.0 : -1.0) * bias;
    c.segment_mass(i) = (1.0 + chi) * rod.total_mass / n_segments;
    c.segment_stiffness(i) = rod.joint_stiffness * ratio * (1.0 + chi);
    c.segment_damping(i) = rod.joint_damping * ratio;
  }
  return c;
}

}  // namespace dynamics
}  // namespace lgpctrl
