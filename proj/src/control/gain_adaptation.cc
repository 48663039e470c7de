#include "lgpctrl/control/gain_adaptation.h"

#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace control {

using numerics::SymMatrix;

GainAdaptation::GainAdaptation(const SymMatrix& k1, const SymMatrix& k2,
                               const SymMatrix& k3)
    : k1_(k1), k2_(k2), k3_(k3) {
  if (k2.dim() != k1.dim() || k3.dim() != k1.dim()) {
    throw InputError("GainAdaptation: K1, K2, K3 must have equal size");
  }
  const SymMatrix* ks[] = {&k1_, &k2_, &k3_};
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd ev = numerics::SymEigenvalues(*ks[i]);
    b_[i] = {ev(0), ev(ev.size() - 1)};
    if (!(b_[i].lo > 0.0)) {
      throw InputError("GainAdaptation: K" + std::to_string(i + 1) +
                       " must be positive definite");
    }
  }
}

GainAdaptation GainAdaptation::Scalar(int dim, double k1, double k2, double k3) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
  return GainAdaptation(SymMatrix(k1 * id), SymMatrix(k2 * id),
                        SymMatrix(k3 * id));
}

SymMatrix GainAdaptation::ClampPsd(const SymMatrix& sigma) const {
  if (sigma.dim() != dim()) throw InputError("GainAdaptation: Σ size mismatch");
  const numerics::SpectralDecomp eig = numerics::SymEig(sigma);
  if (eig.eigenvalues(0) >= 0.0) return sigma;
  return SymMatrix(eig.eigenvectors *
                   eig.eigenvalues.cwiseMax(0.0).asDiagonal() *
                   eig.eigenvectors.transpose());
}

Eigen::MatrixXd GainAdaptation::InnerInverseTimesK1(const SymMatrix& sigma) const {
  const Eigen::MatrixXd& k3 = k3_.matrix();
  const SymMatrix inner(k3 * (k2_.matrix() + sigma.matrix()) * k3 +
                        k1_.matrix());
  return numerics::CholFactor(inner, numerics::JitterPolicy::kNone)
      .Solve(k1_.matrix());
}

SymMatrix GainAdaptation::Gain(const SymMatrix& sigma) const {
  const Eigen::MatrixXd x = InnerInverseTimesK1(ClampPsd(sigma));
  return SymMatrix(k1_.matrix() - k1_.matrix() * x);
}

SymMatrix GainAdaptation::GainRate(const SymMatrix& sigma,
                                   const SymMatrix& sigma_dot) const {
  if (sigma_dot.dim() != dim()) {
    throw InputError("GainAdaptation: Σ̇ size mismatch");
  }
  // K̃⁻¹K₁ is x; K₁K̃⁻¹ = xᵀ.
  const Eigen::MatrixXd x = InnerInverseTimesK1(ClampPsd(sigma));
  const Eigen::MatrixXd& k3 = k3_.matrix();
  return SymMatrix(x.transpose() * k3 * sigma_dot.matrix() * k3 * x);
}

double GainAdaptation::LowerBound() const {
  return 1.0 / (1.0 / (b_[2].lo * b_[2].lo * b_[1].lo) + 1.0 / b_[0].lo);
}

double GainAdaptation::UpperBound() const { return b_[0].hi; }

GainBounds GainAdaptation::Bounds(double sigma_dot_lo,
                                  double sigma_dot_hi) const {
  if (sigma_dot_lo > 0.0 || sigma_dot_hi < 0.0) {
    throw InputError("GainAdaptation: need sigma_dot_lo <= 0 <= sigma_dot_hi");
  }
  const double c = b_[0].hi * b_[2].hi /
                   (b_[2].lo * b_[2].lo * b_[1].lo + b_[0].lo);
  return {LowerBound(), UpperBound(), -c * c * std::abs(sigma_dot_lo),
          c * c * sigma_dot_hi};
}

}  // namespace control
}  // namespace lgpctrl
