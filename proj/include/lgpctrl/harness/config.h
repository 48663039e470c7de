#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lgpctrl/dynamics/fem_rod.h"
#include "lgpctrl/dynamics/two_link.h"

namespace lgpctrl {
namespace harness {

inline constexpr int kConfigVersion = 1;

enum class PlantType { kTwoLink, kSoftRobot };

std::string ToString(PlantType type);

struct TwoLinkPlantConfig {
  dynamics::TwoLinkParams params;
  /// Relative parameter bias χ per link of the parametric estimate.
  Eigen::Vector2d bias{0.5, -0.5};
};

struct SoftRobotPlantConfig {
  int n_elems{20};
  int paper_n_elems{100};
  /// The physical rod; stiffness and damping refer to reference_n_elems joints
  /// and are rescaled to the simulated discretization.
  dynamics::FemRodParams rod;
  int reference_n_elems{100};
  int segments{4};
  int sublinks{4};
  /// Alternating relative bias of the constant-curvature estimate.
  double bias{0.25};
};

struct PlantConfig {
  PlantType type{PlantType::kTwoLink};
  TwoLinkPlantConfig two_link;
  SoftRobotPlantConfig soft_robot;
};

/// Equidistant grid over q ∈ [−half_width, half_width]^N at fixed velocity
/// and acceleration.
struct PositionGrid {
  double half_width{1.0};
  int points{5};
  Eigen::VectorXd dq;
  Eigen::VectorXd ddq;
};

/// Equidistant grid over q̇ ∈ [−half_width, half_width]^N at q = q̈ = 0.
struct VelocityGrid {
  double half_width{1.0};
  int points{3};
};

struct TrainingConfig {
  // Two-link recipe.
  std::vector<PositionGrid> position_grids;
  VelocityGrid velocity_grid;
  PositionGrid validation_grid;
  double torque_noise{0.1};
  double accel_noise{0.0};
  // Soft-robot step-response recipe.
  double step_amplitude{1.0};
  double step_horizon{4.0};
  int step_samples{24};
  /// Validation positions per second of the step response.
  double validation_rate{250.0};
  /// Torque noise as a fraction of the step amplitude.
  double step_noise{0.01};
  /// RK4 substeps per validation sample when simulating the FEM plant.
  int sim_substeps{800};
  /// RK4 substeps per validation sample when resimulating the learned model.
  int resim_substeps{8};
};

struct HyperoptConfig {
  int budget{200};
  double initial_step{0.5};
  /// Scales applied to the unit default kinetic and elastic amplitudes.
  double kinetic_scale{1.0};
  double elastic_scale{1.0};
  /// Inertia admissibility: the learned M̂ is evaluated on a q-grid with
  /// `inertia_points` per axis over [−w, w]^N (w = inertia_half_width, or the
  /// reference amplitude plus certificate.q_margin when 0). Candidates whose
  /// smallest eigenvalue falls below inertia_floor_ratio times the prior's are
  /// penalized. 0 points disables the check.
  int inertia_points{0};
  double inertia_half_width{0.0};
  double inertia_floor_ratio{0.5};
  double inertia_penalty{1e4};
};

struct AdaptationConfig {
  double k1{100.0};
  double k2{0.02};
  double k3{7.11};
};

struct ControllersConfig {
  std::vector<std::string> roster;
  double kp{10.0};
  double kd{10.0};
  AdaptationConfig adaptation;
  double eps_reg{1e-3};
};

struct ReferenceConfig {
  Eigen::VectorXd amplitude;
  double omega{1.0};
  Eigen::VectorXd q0;
  Eigen::VectorXd dq0;
};

struct IntegrationConfig {
  /// Controller sample period.
  double dt{1e-3};
  int substeps{1};
  int record_every{1};
  double t_end{20.0};
  double window_start{10.0};
  /// Per-controller sample periods (canonical names). The recorded spacing
  /// dt·record_every must be a whole multiple of each override.
  std::map<std::string, double> controller_dt;
};

/// Sample period, RK4 substeps and record stride for one controller. An
/// override keeps the base RK4 step as a ceiling and the recorded spacing.
struct Sampling {
  double dt{0.0};
  int substeps{1};
  int record_every{1};
};

Sampling SamplingFor(const IntegrationConfig& integration,
                     const std::string& controller);

/// Canonical roster names.
const std::vector<std::string>& ControllerNames();

struct CertificateConfig {
  double delta{0.5269};
  double upsilon_lb{6.0};
  int grid{64};
  int refine_rounds{60};
  /// Sampling of the worst-case plant bounds around the reference.
  int samples{2000};
  double q_margin{1.0};
  double dq_margin{2.0};
  /// Number of runs of the random initial-condition study.
  int runs{10};
  double q0_std{1.0471975511965976};
  double dq0_mean{1.5707963267948966};
  double dq0_std{1.0471975511965976};
  double t_end{10.0};
  /// Externally supplied (ε, ϑ, α̲) checked against the sampled bounds by the
  /// report stage. Empty skips the check.
  std::vector<double> anchor{1.1012, 1.4211, 0.1056};
};

struct MonteCarloConfig {
  std::vector<double> omegas;
  int realizations{10};
  int paper_realizations{100};
  /// Initial states uniform on [−ic_half_width, ic_half_width]^{2N}.
  double ic_half_width{0.7853981633974483};
  double amplitude{1.5707963267948966};
  /// A run also counts as diverged when max‖e‖ over the window exceeds this.
  double divergence_error{3.141592653589793};
  /// 0 uses the hardware concurrency.
  int threads{0};
};

struct ExperimentConfig {
  int version{kConfigVersion};
  PlantConfig plant;
  TrainingConfig training;
  HyperoptConfig hyperopt;
  ControllersConfig controllers;
  ReferenceConfig reference;
  IntegrationConfig integration;
  CertificateConfig certificate;
  MonteCarloConfig montecarlo;
  std::string output_dir{"out"};
  std::uint64_t seed{1};
  bool paper_scale{false};

  int dof() const;
  /// FEM discretization in use (desk or full scale).
  int fem_elems() const;
  int realizations() const;
  /// @throws ConfigError on inconsistent values.
  void Validate() const;
};

/// Defaults reproducing the two benchmark setups at desk scale.
ExperimentConfig DefaultConfig(PlantType type);

/// Starts from DefaultConfig(plant.type) and overlays the document.
/// @throws ConfigError on unknown keys, wrong types, a missing or unsupported
/// version, or invalid values.
ExperimentConfig ConfigFromJson(const nlohmann::json& doc);

/// Complete document; ConfigFromJson(ConfigToJson(c)) reproduces c.
nlohmann::json ConfigToJson(const ExperimentConfig& config);

/// Applies "a.b.c=value" to a document. The value is parsed as JSON when
/// possible and taken as a string otherwise.
/// @throws ConfigError on a malformed assignment.
void ApplyOverride(nlohmann::json* doc, const std::string& assignment);

/// Reads a config file (JSON text, '//' line comments allowed), applies the
/// overrides and parses it. An empty path starts from {"version": 1}.
/// @throws ConfigError on I/O or content errors.
ExperimentConfig LoadConfig(const std::string& path,
                            const std::vector<std::string>& overrides = {});

}  // namespace harness
}  // namespace lgpctrl
