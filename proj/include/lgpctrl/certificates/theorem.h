#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgpctrl/certificates/bounds.h"
#include "lgpctrl/control/gain_adaptation.h"
#include "lgpctrl/dynamics/el_components.h"

namespace lgpctrl {
namespace certificates {

/// Lemma-1 intervals for K(Σ) and dK/dt.
control::GainBounds GainIntervals(const control::GainAdaptation& gain,
                                  double sigma_dot_lo, double sigma_dot_hi);

struct KappaPhi {
  double kappa{0.0};
  double phi{0.0};
};

/// κ = k̲_P + ε(d̲ − α̲m̂_Σ),
/// φ = 2[d̲ − ε(k̲_P − ϑ/2) + α̲κ] − (ε + α̲)m̂_Σ.
KappaPhi ComputeKappaPhi(const WorstCaseBounds& b, double eps, double theta,
                         double alpha_lb);

struct CertificateParams {
  double eps{0.0};
  double theta{0.0};
  double alpha_lb{0.0};
  double kappa{0.0};
  double phi{0.0};
  WorstCaseBounds bounds;
};

/// Fills κ and φ from the bounds; does not check feasibility.
CertificateParams MakeParams(const WorstCaseBounds& b, double eps,
                             double theta, double alpha_lb);

struct Constraint {
  std::string name;
  double value{0.0};
  double limit{0.0};
  bool satisfied{false};
};

struct FeasibilityReport {
  std::vector<Constraint> constraints;

  bool ok() const;
  /// Names of the violated constraints.
  std::vector<std::string> violated() const;
  /// One line per constraint: name, value, limit, status.
  std::string ToString() const;
};

/// Checks ε, ϑ, α̲ > 0, the two ε upper bounds, the ϑ bound, the two α̲
/// bounds, κ, φ > 0 and metric positivity ε < √(κ/m̄̂).
FeasibilityReport CheckFeasibility(const WorstCaseBounds& b, double eps,
                                   double theta, double alpha_lb);

struct MetricBounds {
  double mu_lo{0.0};
  double mu_hi{0.0};
};

/// μ̲, μ̄ = ½(κ + m̂ ∓ √((κ − m̂)² + (2εm̄̂)²)) with (κ̲, m̲̂) for the lower and
/// (κ̄, m̄̂) for the upper bound.
/// @throws InfeasibleError unless 0 < ε < √(m̲̂κ̲)/m̄̂.
MetricBounds ComputeMetricBounds(double kappa_lo, double kappa_hi, double m_lo,
                                 double m_hi, double eps);

/// Ĝ(e) = Ĝ_model(e) − Ĝ_model(0), the potential the natural closed loop keeps.
double ShapedPotential(const dynamics::LagrangianModel& model,
                       const Eigen::VectorXd& e);

/// V = Ĝ(e) + ½κ‖e‖² + ε eᵀM̂(q)ė + ½ėᵀM̂(q)ė. Ĝ is dropped for
/// kCompensating.
double LyapunovV(const dynamics::LagrangianModel& model, Structure structure,
                 double kappa, double eps, const Eigen::VectorXd& q,
                 const Eigen::VectorXd& e, const Eigen::VectorXd& de);

/// μ̲ = (κ + m)/2 − √(((κ − m)/2)² + (εm)²) + 2Ĝ/‖x‖². The Ĝ term is omitted
/// when x_sq is 0.
double MuFloor(double kappa, double m_lo, double eps, double potential,
               double x_sq);

/// ρ = Δ√((ε/ϑ + 1/φ)/(2μ̲)); +∞ when mu_lb ≤ 0 (certificate void).
double Radius(const CertificateParams& p, double mu_lb);

/// V̲ = (ε/ϑ + 1/φ)Δ²/4.
double VFloor(const CertificateParams& p);

/// Everything the rate needs at one instant, frozen.
struct FrozenSample {
  Structure structure{Structure::kNatural};
  Eigen::MatrixXd M;  // M̂(q)
  Eigen::MatrixXd C;  // Ĉ(q, q̇)
  Eigen::MatrixXd D;  // D̂(ė); zero for kCompensating
  Eigen::VectorXd e;
  Eigen::VectorXd de;
  Eigen::VectorXd g_q;  // ĝ(q)
  Eigen::VectorXd d_q;  // D̂(q̇)q̇
  Eigen::VectorXd g_e;  // ĝ(e)
  double potential{0.0};  // Ĝ(e)
  Eigen::MatrixXd kp;
  Eigen::MatrixXd kd;
  double eps_reg{1e-3};
};

FrozenSample Freeze(const dynamics::LagrangianModel& model,
                    Structure structure, const Eigen::VectorXd& q,
                    const Eigen::VectorXd& dq, const Eigen::VectorXd& e,
                    const Eigen::VectorXd& de, const Eigen::MatrixXd& kp,
                    const Eigen::MatrixXd& kd, double eps_reg);

/// The error-independent remainder matrix
///   R = [[εK̃_P, ½(K̃_P + ε(D̃ − Ĉᵀ))], [½(K̃_P + ε(D̃ − Ĉ)), D̃]],
/// K̃_P = K_P − k̲_P I, D̃ = D̂ − d̲̂ I + K_D − k̲_D I.
Eigen::MatrixXd RemainderMatrix(const FrozenSample& s,
                                const CertificateParams& p);

/// The gated structure terms: c = ε(eᵀĝ(e) + ν_e + ω_ė) + ν_ė + ω_e, where
/// ν_e = h(eᵀĝ_q)eᵀĝ_q‖e‖²/(ε_r + ‖e‖²), ω_e = h(eᵀĝ_q)ėᵀP_eĝ_q and
/// likewise for ė with d̂_q̇. Zero for kCompensating.
double StructureTerms(const FrozenSample& s, double eps);

struct RateResult {
  double alpha{0.0};
  /// Region-ℰ: a real root exists and α ≥ α̲.
  bool in_region{false};
  bool real_root{false};
  /// ‖x‖ = 0: α is the κ-floor limit with the state terms dropped.
  bool zero_state{false};
  double m_star{0.0};
  double lambda_r{0.0};
  double a0{0.0};
  double a1{0.0};
  double a2{0.0};
};

/// Time-variant rate: the smallest root over m̂ ∈ λ(M̂) ∪ {m̲̂, m̄̂} of
/// a₀ − 2a₁α + a₂α² = 0, where
///   a₀ = ξ² − ζ² − b², a₁ = ϰξ + (κ − m̂)ζ − 2εm̂b,
///   a₂ = ϰ² − (κ − m̂)² − (2εm̂)²,
///   ϰ = κ + m̂ + 4Ĝ/‖x‖², ζ = γ − ε(k̲_P − ϑ/2 + m̂),
///   ξ = ε(k̲_P − ϑ/2 − m̂) + γ + 2λ̲(R) + 2c/‖x‖².
RateResult RateAlpha(const FrozenSample& s, const CertificateParams& p);

}  // namespace certificates
}  // namespace lgpctrl
