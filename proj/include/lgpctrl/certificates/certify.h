#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgpctrl/certificates/theorem.h"
#include "lgpctrl/common/csv.h"
#include "lgpctrl/control/controllers.h"
#include "lgpctrl/dynamics/integrator.h"

namespace lgpctrl {
namespace certificates {

struct CertificateTrace {
  std::vector<double> t;
  std::vector<double> V;
  std::vector<double> alpha;
  std::vector<double> rho;
  std::vector<double> envelope;
  std::vector<double> err_norm;
  std::vector<bool> violated;
  std::vector<double> mu_lb;
  std::vector<bool> in_region;
  double v_floor{0.0};
  double c0{0.0};

  int size() const { return static_cast<int>(t.size()); }
  int violations() const;
  /// Samples without a claim: outside ℰ or μ̲(t) ≤ 0.
  int region_misses() const;
  /// Columns t, V, alpha, rho, envelope, err_norm, violated.
  CsvTable ToCsv() const;
};

/// Evaluates the certificate along a recorded closed loop. `gains` holds the
/// K_P, K_D actually applied at each sample (TrackingController::log()).
/// Inside region ℰ with μ̲(t) > 0 the envelope is
/// ρ(t) + √(2 max(V(s) − V̲, 0)/μ̲(t)) e^{−∫_s^t α}, where s is the latest
/// entry into ℰ and ∫α uses the trapezoid rule. Elsewhere the envelope is +∞
/// (no claim; counted by region_misses()). A sample is violated when ‖x‖
/// exceeds a finite envelope. `c0` reports the t₀ coefficient.
/// @throws InputError if the trajectory has no error record or the gain log
/// length differs.
CertificateTrace Certify(const dynamics::Trajectory& traj,
                         const dynamics::LagrangianModel& model,
                         Structure structure, const CertificateParams& params,
                         const std::vector<control::GainSample>& gains,
                         double eps_reg);

struct OptimizeOptions {
  /// λ̲(Υ(α̲)) ≥ υ̲.
  double upsilon_lb{6.0};
  int grid{64};
  double eps_range[2]{1e-3, 10.0};
  double theta_range[2]{1e-3, 1e3};
  double alpha_range[2]{1e-4, 10.0};
  int refine_rounds{60};
  /// Also enforce every inequality of CheckFeasibility (not only the
  /// constraints of the minimization).
  bool require_theorem{true};
};

struct OptimizeResult {
  bool feasible{false};
  CertificateParams params;
  double objective{0.0};
  /// Worst-case radius ρ̲ at the metric floor.
  double rho_worst{0.0};
  double upsilon_min{0.0};
  /// When infeasible: the constraints that rejected the most grid points.
  std::vector<std::string> binding;
};

/// Worst-case λ̲(Υ(α̲)) over m̂ ∈ [m̲̂, m̄̂] (attained at an end point).
double UpsilonFloor(const CertificateParams& p);

/// Smallest eigenvalue of [[κI, εM̂], [εM̂, M̂]] over all M̂ with spectrum in
/// [m̲̂, m̄̂]; positive iff ε < √(κ/m̄̂).
double MetricFloor(const CertificateParams& p);

/// Worst-case radius ρ̲ = ρ at the metric floor (Ĝ dropped).
double WorstCaseRadius(const CertificateParams& p);

/// Minimizes ρ̲ + 1/α̲ subject to κ, φ > 0, 0 < ε < √(κ/m̄̂) and
/// λ̲(Υ(α̲)) ≥ υ̲ by a log grid followed by coordinate refinement.
OptimizeResult OptimizeCertParams(const WorstCaseBounds& b,
                                  const OptimizeOptions& options = {});

}  // namespace certificates
}  // namespace lgpctrl
