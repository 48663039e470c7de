#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "lgpctrl/dynamics/el_components.h"
#include "lgpctrl/dynamics/planar_chain.h"

namespace lgpctrl {
namespace dynamics {

/// Discretized rod: n_elems rigid elements joined by torsional spring-damper
/// joints, clamped at the base joint.
struct FemRodParams {
  int n_elems{100};
  double total_mass{1.0};
  double total_length{1.0};
  /// Rotational inertia of each element about its center; a negative value
  /// selects the slender-element default m_n ℓ_n²/12 = 1/(12 n³) for a unit rod.
  double element_inertia{-1.0};
  double joint_stiffness{10.0};
  double joint_damping{5.0};
  double gravity{9.81};
  /// When true gravity acts along the rod at q = 0, so the straight rod hangs
  /// in equilibrium; when false gravity is off.
  bool gravity_aligned{true};
};

/// Parameters for a coarser discretization that keep the continuum bending
/// stiffness and damping of a reference rod: k_n and d_n scale with
/// n_elems / reference.n_elems.
FemRodParams RescaledFemRodParams(const FemRodParams& reference, int n_elems);

/// @throws InputError if n_elems < 2 or physical parameters are non-positive.
std::unique_ptr<PlanarChain> MakeFemRod(const FemRodParams& p);

/// Assignment of FEM joints to constant-curvature segments. Joint j belongs to
/// segment floor(j·N/n); its angle is q_cc / (joints in that segment).
class CcMap {
 public:
  /// @throws InputError unless 1 ≤ n_segments ≤ n_elems.
  CcMap(int n_segments, int n_elems);

  int n_segments() const { return n_segments_; }
  int n_elems() const { return n_elems_; }
  /// n_elems × n_segments.
  const Eigen::MatrixXd& matrix() const { return a_; }
  int segment_of(int joint) const { return segment_[joint]; }

  /// Least-squares curvature (AᵀA)⁻¹Aᵀ applied to q and q̇.
  JointState Reduce(const JointState& fem) const;
  Eigen::VectorXd ReduceVector(const Eigen::VectorXd& fem) const;

  /// Exact constant-curvature embedding q_fem = A q_cc.
  Eigen::VectorXd Embed(const Eigen::VectorXd& q_cc) const;

  /// Virtual-work consistent torque map A(AᵀA)⁻¹τ_cc, so Aᵀτ_fem = τ_cc.
  Eigen::VectorXd Actuate(const Eigen::VectorXd& tau_cc) const;

 private:
  int n_segments_;
  int n_elems_;
  Eigen::MatrixXd a_;
  Eigen::MatrixXd reduce_;   // (AᵀA)⁻¹Aᵀ
  Eigen::MatrixXd actuate_;  // A(AᵀA)⁻¹
  std::vector<int> segment_;
};

JointState CcReduce(const CcMap& map, const JointState& fem);
Eigen::VectorXd CcActuate(const CcMap& map, const Eigen::VectorXd& tau_cc);

/// Parametric constant-curvature model of a rod: each of the N segments is a
/// chain of `sublinks` rigid links sharing the segment curvature, with
/// segment masses, stiffnesses and dampings given in CC coordinates.
struct CcChainParams {
  double total_length{1.0};
  double gravity{9.81};
  int sublinks{5};
  Eigen::VectorXd segment_mass;
  Eigen::VectorXd segment_stiffness;
  Eigen::VectorXd segment_damping;
};

std::unique_ptr<PlanarChain> MakeCcChain(const CcChainParams& p);

/// The erroneous CC estimate of a rod: m̂ᵢ = (1+χᵢ)M/N, k̂ᵢ = k_n N(1+χᵢ)/n,
/// d̂ᵢ = d_n N/n with χᵢ = (−1)^{i−1}·bias.
CcChainParams BiasedCcChainParams(const FemRodParams& rod, int n_segments,
                                  int sublinks, double bias);

}  // namespace dynamics
}  // namespace lgpctrl
