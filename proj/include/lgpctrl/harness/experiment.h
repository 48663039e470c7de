#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgpctrl/certificates/certify.h"
#include "lgpctrl/control/controllers.h"
#include "lgpctrl/dynamics/fem_rod.h"
#include "lgpctrl/harness/config.h"
#include "lgpctrl/harness/metrics.h"
#include "lgpctrl/lgp/hyperopt.h"
#include "lgpctrl/lgp/model.h"

namespace lgpctrl {
namespace harness {

/// Ground-truth plant and the erroneous parametric estimate. For the soft
/// robot the truth is the FEM rod and the estimate lives in constant-curvature
/// coordinates.
struct Plant {
  PlantType type{PlantType::kTwoLink};
  std::shared_ptr<const dynamics::LagrangianModel> truth;
  std::shared_ptr<const dynamics::LagrangianModel> estimate;
  std::optional<dynamics::CcMap> cc;

  /// Coordinates the controllers work in.
  int dof() const { return estimate->dof(); }
  /// Maps a controller-coordinate state to the plant state.
  dynamics::JointState Embed(const dynamics::JointState& x) const;
};

Plant MakePlant(const ExperimentConfig& config);

/// Sampled step response of the soft robot in curvature coordinates.
struct StepResponse {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> q;
  std::vector<Eigen::VectorXd> dq;
  std::vector<Eigen::VectorXd> ddq;
  /// Constant curvature-space torque that produced the response.
  Eigen::VectorXd tau;
};

struct Dataset {
  lgp::TrainingSet train;
  /// Two-link: torque validation pairs. Soft robot: empty.
  lgp::TrainingSet validation;
  /// Soft robot: the densely sampled response used for validation.
  StepResponse response;
};

/// Training pairs for the configured recipe. Noise draws come from `rng`.
/// @throws InputError if the recipe does not match the plant.
Dataset BuildTrainingSet(const ExperimentConfig& config, const Plant& plant,
                         std::mt19937_64* rng);

/// As above with the training stream derived from config.seed.
Dataset BuildTrainingSet(const ExperimentConfig& config, const Plant& plant);

/// Deterministic stream for one purpose of a run.
std::mt19937_64 MakeRng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Learned model plus diagnostics. RMSE is in torque units for the two-link
/// and in curvature (rad) for the soft robot.
struct FitResult {
  std::shared_ptr<const lgp::LgpModel> model;
  lgp::HyperoptResult hyper;
  double prior_rmse{0.0};
  double model_rmse{0.0};
};

/// Initial hyperparameters for the plant.
lgp::Hyperparams InitialHyperparams(const ExperimentConfig& config, int dof);

/// Root-mean-square curvature error of the step response resimulated under
/// `model`; +∞ if the resimulation diverges.
double ResimulationRmse(const dynamics::LagrangianModel& model,
                        const StepResponse& response, int substeps);

/// Least-squares hyperparameter search followed by the final fit.
FitResult FitModel(const ExperimentConfig& config, const Plant& plant,
                   const Dataset& data);

/// Accepts the roster names pdp, lgp_pdp, nat_pdp, lgp_nat_pdp,
/// lgp_var_nat_pdp with '-' or '_' separators; "var_nat_pdp" means the learned
/// variant.
/// @throws InputError for other names.
std::string CanonicalControllerName(const std::string& name);

/// Display label as used in result tables.
std::string ControllerLabel(const std::string& canonical);

bool UsesLearnedModel(const std::string& canonical);

/// @throws InputError when a learned controller is requested without a model.
control::ControllerSpec MakeControllerSpec(
    const std::string& name, const ExperimentConfig& config, const Plant& plant,
    const std::shared_ptr<const lgp::LgpModel>& model);

struct Run {
  std::string name;
  dynamics::Trajectory traj;
  std::vector<control::GainSample> gains;
};

/// Closed-loop simulation in controller coordinates from x0.
Run Simulate(const ExperimentConfig& config, const Plant& plant,
             const std::string& name, const control::ControllerSpec& spec,
             const control::Reference& ref, const dynamics::JointState& x0,
             double t_end);

control::Reference MakeReference(const ExperimentConfig& config);

struct BenchmarkResult {
  std::vector<MetricsRow> rows;
  std::vector<Run> runs;
};

/// Every roster controller on the configured task. Divergence is recorded in
/// the row, not thrown.
BenchmarkResult RunBenchmark(const ExperimentConfig& config, const Plant& plant,
                             const std::shared_ptr<const lgp::LgpModel>& model);

/// Certificate parameters for a controller: worst-case bounds sampled around
/// the reference under the controller's own model, then optimized.
struct CertificateSetup {
  certificates::Structure structure{certificates::Structure::kNatural};
  certificates::WorstCaseBounds bounds;
  certificates::OptimizeResult optimum;
};

CertificateSetup PrepareCertificate(const ExperimentConfig& config,
                                    const control::ControllerSpec& spec,
                                    const control::Reference& ref);

/// Certificate trace of a finished run (its samples must carry gains).
/// @throws InfeasibleError if the setup has no feasible parameters.
certificates::CertificateTrace CertifyRun(const ExperimentConfig& config,
                                          const control::ControllerSpec& spec,
                                          const CertificateSetup& setup,
                                          const Run& run);

/// Random initial-condition study of the certificate envelope.
struct CertificationStudy {
  CertificateSetup setup;
  std::vector<Run> runs;
  std::vector<certificates::CertificateTrace> traces;
  int violations() const;
  int region_misses() const;
};

/// q₀ ~ N(0, σ_q²I), q̇₀ ~ N(μ·1, σ_q̇²I) for `certificate.runs` runs.
/// @throws InfeasibleError if no feasible certificate parameters exist.
CertificationStudy RunCertificationStudy(
    const ExperimentConfig& config, const Plant& plant,
    const std::shared_ptr<const lgp::LgpModel>& model, const std::string& name);

}  // namespace harness
}  // namespace lgpctrl
