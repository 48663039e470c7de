#pragma once

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "lgpctrl/lgp/kernels.h"
#include "lgpctrl/lgp/model.h"

namespace lgpctrl {
namespace lgp {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json HyperparamsToJson(const Hyperparams& h);
/// @throws InputError on missing or malformed fields.
Hyperparams HyperparamsFromJson(const nlohmann::json& j);

/// Contents of a model document.
struct ModelDocument {
  TrainingSet training;
  Hyperparams hyperparams;
  Eigen::VectorXd weights;
  /// Opaque description of the prior mean, interpreted by the caller.
  nlohmann::json prior;
};

/// Self-describing text document. The weight vector is written as hex floats
/// so that a round trip is bit-exact; other numbers use shortest round-trip
/// decimal form.
std::string SerializeModel(const LgpModel& model, const nlohmann::json& prior);

/// @throws InputError on a malformed document or unsupported version.
ModelDocument ParseModel(const std::string& text);

/// Training CSV with header q_1..q_N, dq_1..dq_N, ddq_1..ddq_N, y_1..y_N.
std::string TrainingSetToCsv(const TrainingSet& ts);
/// @throws InputError on malformed CSV.
TrainingSet TrainingSetFromCsv(const std::string& text);

}  // namespace lgp
}  // namespace lgpctrl
