#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "lgpctrl/control/controllers.h"
#include "lgpctrl/control/reference.h"
#include "lgpctrl/dynamics/el_components.h"

namespace lgpctrl {
namespace certificates {

/// Which closed loop a certificate describes.
///  kCompensating: PD+, where gravity and dissipation are cancelled and the
///    metric stiffness is κI.
///  kNatural: nat-PD+ and var-nat-PD+, where the model potential Ĝ(e) and
///    dissipation D̂(ė) stay in the loop and 𝒦 = 𝒦̂_G + κI.
enum class Structure { kCompensating, kNatural };

Structure StructureOf(control::ControllerKind kind);

/// Constant worst-case bounds over the task workspace.
struct WorstCaseBounds {
  double m_lo{0.0};      // m̲̂
  double m_hi{0.0};      // m̄̂
  double d_hat_lo{0.0};  // d̲̂, lower eigenvalue of D̂ (0 for kCompensating)
  double kd_lo{0.0};     // k̲_D
  double kp_lo{0.0};     // k̲_P
  double delta{0.0};     // Δ, model-error scale
  double c0{0.0};        // ‖Ĉ‖ ≤ (ĉ₀ + ĉ₁‖q‖)‖q̇‖
  double c1{0.0};

  /// d̲ = d̲̂ + k̲_D.
  double d_lo() const { return d_hat_lo + kd_lo; }
  /// m̂_Σ = m̲̂ + m̄̂.
  double m_sum() const { return m_lo + m_hi; }

  /// @throws InputError unless 0 < m_lo ≤ m_hi, d_lo() > 0, kp_lo > 0 and
  /// delta ≥ 0.
  void Validate() const;
};

struct SamplingOptions {
  /// Reference times are drawn uniformly from [0, t_end].
  double t_end{10.0};
  int samples{2000};
  /// Half-widths of the box around (q_d(t), q̇_d(t)).
  double q_margin{1.0};
  double dq_margin{2.0};
  std::uint64_t seed{1};
};

/// Smallest eigenvalues of the gains a controller can apply: the base gain
/// plus, for var-nat-PD+, the adaptation floor.
struct GainFloors {
  double kp_lo{0.0};
  double kd_lo{0.0};
};
GainFloors FloorsOf(const control::ControllerSpec& spec);

/// Estimates the worst-case bounds by sampling the model in a tube around the
/// reference. The result bounds the samples, not the continuum; the tube and
/// density are the caller's soundness knobs.
/// @throws InputError for invalid options or a non-positive sampled inertia.
WorstCaseBounds SampleBounds(const dynamics::LagrangianModel& model,
                             const control::Reference& ref, Structure structure,
                             const GainFloors& floors, double delta,
                             const SamplingOptions& options = {});

}  // namespace certificates
}  // namespace lgpctrl
