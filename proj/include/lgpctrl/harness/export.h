#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lgpctrl/certificates/certify.h"
#include "lgpctrl/common/csv.h"
#include "lgpctrl/dynamics/integrator.h"
#include "lgpctrl/harness/config.h"
#include "lgpctrl/harness/experiment.h"
#include "lgpctrl/harness/monte_carlo.h"

namespace lgpctrl {
namespace harness {

inline constexpr const char* kSoftwareVersion = "1.0.0";

/// Creates parent directories as needed.
/// @throws IoError naming the path.
void WriteTextFile(const std::string& path, const std::string& text);
/// @throws IoError naming the path.
std::string ReadTextFile(const std::string& path);

/// Columns t, q_i, dq_i, e_i, de_i, tau_i, V, alpha, rho, envelope, sigma_min,
/// sigma_max at 17 significant digits. Certificate columns are NaN without a
/// trace. An empty trajectory gives the header only.
/// @throws InputError if the trace length differs from the trajectory.
std::string TrajectoryToCsv(const dynamics::Trajectory& traj,
                            const certificates::CertificateTrace* trace = nullptr);

/// Numeric columns of a trajectory CSV.
CsvTable TrajectoryFromCsv(const std::string& text);

/// One row per controller. Diverged rows carry inf metrics and diverged = 1.
std::string MetricsToCsv(const std::vector<MetricsRow>& rows);

/// One row per (ω, controller) cell.
std::string MonteCarloToCsv(const MonteCarloResult& result);

/// Adaptive gain extremes and posterior variance per recorded sample.
std::string GainsToCsv(const Run& run);

/// Run metadata: config echo, seed, software and format versions, and any
/// stage-specific fields in `extra`.
nlohmann::json Metadata(const ExperimentConfig& config, const std::string& stage,
                        const nlohmann::json& extra = nlohmann::json::object());

/// Model document with the prior described by the plant configuration.
std::string ModelToText(const lgp::LgpModel& model, const ExperimentConfig& config);

/// Rebuilds a model written by ModelToText for the plant of `config`.
/// @throws InputError if the document belongs to another plant.
std::shared_ptr<const lgp::LgpModel> ModelFromText(const std::string& text,
                                                   const Plant& plant,
                                                   const ExperimentConfig& config);

}  // namespace harness
}  // namespace lgpctrl
