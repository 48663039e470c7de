#include "lgpctrl/harness/export.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/lgp/serialization.h"

namespace lgpctrl {
namespace harness {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void Indexed(std::vector<std::string>* header, const std::string& stem, int n) {
  for (int i = 1; i <= n; ++i) header->push_back(stem + "_" + std::to_string(i));
}

void Append(std::vector<double>* row, const Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) row->push_back(v(i));
}

}  // namespace

void WriteTextFile(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory for '" + path + "': " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  return ss.str();
}

std::string TrajectoryToCsv(const dynamics::Trajectory& traj,
                            const certificates::CertificateTrace* trace) {
  if (trace && trace->size() != traj.size()) {
    throw InputError("TrajectoryToCsv: trace and trajectory lengths differ");
  }
  const int n = traj.size() ? static_cast<int>(traj.q[0].size()) : 0;
  const int m = traj.has_errors() ? static_cast<int>(traj.e[0].size()) : n;
  const int p = traj.size() ? static_cast<int>(traj.tau[0].size()) : n;
  std::vector<std::string> header{"t"};
  Indexed(&header, "q", n);
  Indexed(&header, "dq", n);
  Indexed(&header, "e", m);
  Indexed(&header, "de", m);
  Indexed(&header, "tau", p);
  for (const char* c : {"V", "alpha", "rho", "envelope", "sigma_min", "sigma_max"}) {
    header.emplace_back(c);
  }
  std::string out = CsvLine(header) + "\n";
  for (int k = 0; k < traj.size(); ++k) {
    std::vector<double> row{traj.t[k]};
    Append(&row, traj.q[k]);
    Append(&row, traj.dq[k]);
    if (traj.has_errors()) {
      Append(&row, traj.e[k]);
      Append(&row, traj.de[k]);
    } else {
      row.insert(row.end(), 2 * m, kNaN);
    }
    Append(&row, traj.tau[k]);
    if (trace) {
      row.insert(row.end(), {trace->V[k], trace->alpha[k], trace->rho[k],
                             trace->envelope[k]});
    } else {
      row.insert(row.end(), 4, kNaN);
    }
    row.push_back(traj.sigma_min[k]);
    row.push_back(traj.sigma_max[k]);
    out += CsvLine(row) + "\n";
  }
  return out;
}

CsvTable TrajectoryFromCsv(const std::string& text) { return ParseCsv(text); }

std::string MetricsToCsv(const std::vector<MetricsRow>& rows) {
  std::string out =
      "controller,tau_l2,tau_max,tau_mean,x_l2,e_max,de_max,e_mean,de_mean,"
      "samples,diverged\n";
  for (const MetricsRow& r : rows) {
    out += r.controller + "," +
           CsvLine(std::vector<double>{r.tau_l2, r.tau_max, r.tau_mean, r.x_l2,
                                       r.e_max, r.de_max, r.e_mean, r.de_mean}) +
           "," + std::to_string(r.samples) + "," + (r.diverged ? "1" : "0") + "\n";
  }
  return out;
}

std::string MonteCarloToCsv(const MonteCarloResult& result) {
  std::string out =
      "omega,controller,realizations,diverged,converged,x_l2_mean,x_l2_std,"
      "tau_l2_mean,tau_l2_std\n";
  for (const MonteCarloCell& c : result.cells) {
    out += CsvLine(std::vector<double>{c.omega}) + "," + c.controller + "," +
           std::to_string(c.realizations) + "," + std::to_string(c.diverged) +
           "," + std::to_string(c.converged) + "," +
           CsvLine(std::vector<double>{c.x_l2_mean, c.x_l2_std, c.tau_l2_mean,
                                       c.tau_l2_std}) +
           "\n";
  }
  return out;
}

std::string GainsToCsv(const Run& run) {
  std::string out = "t,kp_min,kp_max,kd_min,kd_max,sigma_min,sigma_max\n";
  for (size_t k = 0; k < run.gains.size(); ++k) {
    const control::GainSample& g = run.gains[k];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> kp(g.kp, Eigen::EigenvaluesOnly);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> kd(g.kd, Eigen::EigenvaluesOnly);
    const double s_lo = k < run.traj.sigma_min.size() ? run.traj.sigma_min[k] : kNaN;
    const double s_hi = k < run.traj.sigma_max.size() ? run.traj.sigma_max[k] : kNaN;
    out += CsvLine(std::vector<double>{
               g.t, kp.eigenvalues().minCoeff(), kp.eigenvalues().maxCoeff(),
               kd.eigenvalues().minCoeff(), kd.eigenvalues().maxCoeff(), s_lo, s_hi}) +
           "\n";
  }
  return out;
}

json Metadata(const ExperimentConfig& config, const std::string& stage,
              const json& extra) {
  json j;
  j["stage"] = stage;
  j["software_version"] = kSoftwareVersion;
  j["config_version"] = kConfigVersion;
  j["model_format_version"] = lgp::kModelFormatVersion;
  j["seed"] = config.seed;
  j["config"] = ConfigToJson(config);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

namespace {

json PriorDescriptor(const ExperimentConfig& c) {
  json p;
  p["plant"] = ToString(c.plant.type);
  p["dof"] = c.dof();
  return p;
}

}  // namespace

std::string ModelToText(const lgp::LgpModel& model, const ExperimentConfig& config) {
  return lgp::SerializeModel(model, PriorDescriptor(config));
}

std::shared_ptr<const lgp::LgpModel> ModelFromText(const std::string& text,
                                                   const Plant& plant,
                                                   const ExperimentConfig& config) {
  const lgp::ModelDocument doc = lgp::ParseModel(text);
  const json want = PriorDescriptor(config);
  if (doc.prior != want) {
    throw InputError("model document was fitted for " + doc.prior.dump() +
                     ", config expects " + want.dump());
  }
  return std::make_shared<const lgp::LgpModel>(doc.training, doc.hyperparams,
                                               plant.estimate, doc.weights);
}

}  // namespace harness
}  // namespace lgpctrl
