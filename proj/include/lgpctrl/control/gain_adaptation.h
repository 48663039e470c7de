#pragma once

#include <Eigen/Dense>

#include "lgpctrl/numerics/linalg.h"

namespace lgpctrl {
namespace control {

/// Eigenvalue extremes of one SPD gain factor.
struct EigBounds {
  double lo{0.0};
  double hi{0.0};
};

/// Interval enclosures for the adaptive gain and its time derivative.
struct GainBounds {
  double k_lo{0.0};
  double k_hi{0.0};
  double dk_lo{0.0};
  double dk_hi{0.0};
};

/// Variance-adaptive gain K(Σ) = K₁(I − [K₃(K₂+Σ)K₃ + K₁]⁻¹K₁).
class GainAdaptation {
 public:
  /// @throws InputError unless all three factors are SPD and equally sized.
  GainAdaptation(const numerics::SymMatrix& k1, const numerics::SymMatrix& k2,
                 const numerics::SymMatrix& k3);

  /// K_i = k_i I.
  static GainAdaptation Scalar(int dim, double k1, double k2, double k3);

  int dim() const { return k1_.dim(); }
  const numerics::SymMatrix& k1() const { return k1_; }
  const numerics::SymMatrix& k2() const { return k2_; }
  const numerics::SymMatrix& k3() const { return k3_; }
  /// Cached spectral extremes of K₁, K₂, K₃ (index 0..2).
  const EigBounds& bounds(int i) const { return b_[i]; }

  /// Negative eigenvalues of sigma are clamped to zero first.
  /// @throws DecompositionError if the inner matrix cannot be factored.
  numerics::SymMatrix Gain(const numerics::SymMatrix& sigma) const;

  /// dK/dt = K₁K̃⁻¹K₃ Σ̇ K₃K̃⁻¹K₁ with K̃ = K₃(K₂+Σ)K₃ + K₁.
  numerics::SymMatrix GainRate(const numerics::SymMatrix& sigma,
                               const numerics::SymMatrix& sigma_dot) const;

  /// Lower and upper spectral bounds of K(Σ) valid for every PSD Σ.
  double LowerBound() const;
  double UpperBound() const;

  /// Bounds of K and dK/dt given −|σ̇_lo| I ≼ Σ̇ ≼ σ̇_hi I.
  /// @throws InputError if sigma_dot_lo > 0 or sigma_dot_hi < 0.
  GainBounds Bounds(double sigma_dot_lo, double sigma_dot_hi) const;

 private:
  numerics::SymMatrix ClampPsd(const numerics::SymMatrix& sigma) const;
  Eigen::MatrixXd InnerInverseTimesK1(const numerics::SymMatrix& sigma) const;

  numerics::SymMatrix k1_;
  numerics::SymMatrix k2_;
  numerics::SymMatrix k3_;
  EigBounds b_[3];
};

}  // namespace control
}  // namespace lgpctrl
