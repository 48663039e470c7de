#include "lgpctrl/harness/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/control/controllers.h"
#include "lgpctrl/harness/experiment.h"

namespace lgpctrl {
namespace harness {

using nlohmann::json;

const std::vector<std::string>& ControllerNames() {
  static const std::vector<std::string> names{"pdp", "lgp_pdp", "nat_pdp",
                                              "lgp_nat_pdp", "lgp_var_nat_pdp"};
  return names;
}

Sampling SamplingFor(const IntegrationConfig& in, const std::string& controller) {
  const auto it = in.controller_dt.find(controller);
  if (it == in.controller_dt.end()) return {in.dt, in.substeps, in.record_every};
  const double dt = it->second;
  Sampling s;
  s.dt = dt;
  s.substeps = std::max(1, static_cast<int>(std::ceil(dt * in.substeps / in.dt - 1e-9)));
  s.record_every = static_cast<int>(std::lround(in.dt * in.record_every / dt));
  return s;
}

std::string ToString(PlantType type) {
  return type == PlantType::kTwoLink ? "two_link" : "soft_robot";
}

namespace {

PlantType ParsePlantType(const std::string& s) {
  if (s == "two_link") return PlantType::kTwoLink;
  if (s == "soft_robot") return PlantType::kSoftRobot;
  throw ConfigError("config: plant.type must be two_link or soft_robot, got '" +
                    s + "'");
}

// Typed access to one JSON object that remembers which keys were read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: " + Where() + " must be an object");
  }

  bool Has(const std::string& key) const { return j_.contains(key); }
  void Mark(const std::string& key) { used_.insert(key); }

  Section Child(const std::string& key) {
    used_.insert(key);
    return Section(j_.at(key), Join(key));
  }

  void Get(const std::string& key, double* out) {
    if (const json* v = Take(key)) {
      if (!v->is_number()) Fail(key, "a number");
      *out = v->get<double>();
    }
  }
  void Get(const std::string& key, int* out) {
    if (const json* v = Take(key)) {
      if (!v->is_number_integer()) Fail(key, "an integer");
      *out = v->get<int>();
    }
  }
  void Get(const std::string& key, std::uint64_t* out) {
    if (const json* v = Take(key)) {
      if (!v->is_number_unsigned()) Fail(key, "a non-negative integer");
      *out = v->get<std::uint64_t>();
    }
  }
  void Get(const std::string& key, bool* out) {
    if (const json* v = Take(key)) {
      if (!v->is_boolean()) Fail(key, "a boolean");
      *out = v->get<bool>();
    }
  }
  void Get(const std::string& key, std::string* out) {
    if (const json* v = Take(key)) {
      if (!v->is_string()) Fail(key, "a string");
      *out = v->get<std::string>();
    }
  }
  void Get(const std::string& key, std::vector<double>* out) {
    if (const json* v = Take(key)) *out = Numbers(key, *v);
  }
  void Get(const std::string& key, Eigen::VectorXd* out) {
    if (const json* v = Take(key)) {
      const std::vector<double> x = Numbers(key, *v);
      *out = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    }
  }
  void Get(const std::string& key, Eigen::Vector2d* out) {
    if (const json* v = Take(key)) {
      const std::vector<double> x = Numbers(key, *v);
      if (x.size() != 2) Fail(key, "an array of 2 numbers");
      *out << x[0], x[1];
    }
  }
  void Get(const std::string& key, std::map<std::string, double>* out) {
    if (const json* v = Take(key)) {
      if (!v->is_object()) Fail(key, "an object of numbers");
      out->clear();
      for (auto it = v->begin(); it != v->end(); ++it) {
        if (!it.value().is_number()) Fail(key + "." + it.key(), "a number");
        (*out)[it.key()] = it.value().get<double>();
      }
    }
  }
  void Get(const std::string& key, std::vector<std::string>* out) {
    if (const json* v = Take(key)) {
      if (!v->is_array()) Fail(key, "an array of strings");
      out->clear();
      for (const auto& e : *v) {
        if (!e.is_string()) Fail(key, "an array of strings");
        out->push_back(e.get<std::string>());
      }
    }
  }

  // Rejects keys that were never read.
  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError("config: unknown key '" + Join(it.key()) + "'");
      }
    }
  }

 private:
  const json* Take(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  std::vector<double> Numbers(const std::string& key, const json& v) const {
    if (!v.is_array()) Fail(key, "an array of numbers");
    std::vector<double> x;
    for (const auto& e : v) {
      if (!e.is_number()) Fail(key, "an array of numbers");
      x.push_back(e.get<double>());
    }
    return x;
  }
  [[noreturn]] void Fail(const std::string& key, const std::string& what) const {
    throw ConfigError("config: " + Join(key) + " must be " + what);
  }
  std::string Join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  std::string Where() const { return path_.empty() ? "document" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json Array(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

void ReadGrid(Section s, PositionGrid* g) {
  s.Get("half_width", &g->half_width);
  s.Get("points", &g->points);
  s.Get("dq", &g->dq);
  s.Get("ddq", &g->ddq);
  s.Finish();
}

json GridToJson(const PositionGrid& g) {
  return {{"half_width", g.half_width},
          {"points", g.points},
          {"dq", Array(g.dq)},
          {"ddq", Array(g.ddq)}};
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

}  // namespace

int ExperimentConfig::dof() const {
  return plant.type == PlantType::kTwoLink ? 2 : plant.soft_robot.segments;
}

int ExperimentConfig::fem_elems() const {
  return paper_scale ? plant.soft_robot.paper_n_elems : plant.soft_robot.n_elems;
}

int ExperimentConfig::realizations() const {
  return paper_scale ? montecarlo.paper_realizations : montecarlo.realizations;
}

void ExperimentConfig::Validate() const {
  Require(version == kConfigVersion, "unsupported version");
  const int n = dof();
  const auto sized = [n](const Eigen::VectorXd& v) { return v.size() == n; };
  if (plant.type == PlantType::kSoftRobot) {
    const SoftRobotPlantConfig& s = plant.soft_robot;
    Require(s.segments >= 1 && s.n_elems >= s.segments &&
                s.paper_n_elems >= s.segments,
            "soft_robot needs 1 <= segments <= n_elems");
    Require(s.sublinks >= 1 && s.reference_n_elems >= 2,
            "soft_robot.sublinks >= 1 and reference_n_elems >= 2");
    Require(training.step_samples >= 1 && training.step_horizon > 0.0 &&
                training.validation_rate > 0.0 &&
                training.sim_substeps >= 1 && training.resim_substeps >= 1,
            "invalid step-response recipe");
  } else {
    for (const PositionGrid& g : training.position_grids) {
      Require(g.points >= 1 && g.half_width >= 0.0 && sized(g.dq) && sized(g.ddq),
              "training grids need points >= 1 and N-vectors dq, ddq");
    }
    Require(training.validation_grid.points >= 1 &&
                sized(training.validation_grid.dq) &&
                sized(training.validation_grid.ddq),
            "invalid validation grid");
    Require(training.velocity_grid.points >= 0, "velocity_grid.points >= 0");
  }
  Require(training.torque_noise >= 0.0 && training.accel_noise >= 0.0 &&
              training.step_noise >= 0.0,
          "noise levels must be non-negative");
  Require(hyperopt.budget >= 1 && hyperopt.initial_step > 0.0,
          "hyperopt.budget >= 1 and initial_step > 0");
  Require(hyperopt.kinetic_scale > 0.0 && hyperopt.elastic_scale > 0.0,
          "hyperopt.kinetic_scale and elastic_scale > 0");
  Require(hyperopt.inertia_points == 0 || hyperopt.inertia_points >= 2,
          "hyperopt.inertia_points must be 0 or >= 2");
  Require(hyperopt.inertia_half_width >= 0.0 && hyperopt.inertia_floor_ratio >= 0.0 &&
              hyperopt.inertia_penalty >= 0.0,
          "hyperopt inertia settings must be >= 0");
  Require(!controllers.roster.empty(), "controllers.roster is empty");
  Require(controllers.kp > 0.0 && controllers.kd > 0.0 &&
              controllers.eps_reg > 0.0,
          "controller gains and eps_reg must be positive");
  Require(controllers.adaptation.k1 > 0.0 && controllers.adaptation.k2 > 0.0 &&
              controllers.adaptation.k3 > 0.0,
          "adaptation gains must be positive");
  Require(sized(reference.amplitude) && sized(reference.q0) &&
              sized(reference.dq0),
          "reference vectors must have one entry per coordinate");
  Require(std::isfinite(reference.omega), "reference.omega must be finite");
  Require(integration.dt > 0.0 && integration.substeps >= 1 &&
              integration.record_every >= 1 &&
              integration.t_end >= integration.dt,
          "integration needs dt > 0, substeps >= 1, record_every >= 1, "
          "t_end >= dt");
  for (const auto& [name, dt] : integration.controller_dt) {
    const auto& names = ControllerNames();
    Require(std::find(names.begin(), names.end(), name) != names.end(),
            "integration.controller_dt: unknown controller '" + name + "'");
    Require(dt > 0.0, "integration.controller_dt." + name + " must be > 0");
    const double ratio = integration.dt * integration.record_every / dt;
    Require(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio && ratio >= 1.0,
            "integration.controller_dt." + name +
                " must divide dt * record_every");
  }
  Require(integration.window_start >= 0.0 &&
              integration.window_start <= integration.t_end,
          "integration.window_start must lie in [0, t_end]");
  Require(certificate.delta >= 0.0 && certificate.upsilon_lb > 0.0 &&
              certificate.grid >= 2 && certificate.refine_rounds >= 0 &&
              certificate.samples >= 1 && certificate.runs >= 0 &&
              certificate.t_end > 0.0,
          "invalid certificate settings");
  Require(certificate.anchor.empty() || certificate.anchor.size() == 3,
          "certificate.anchor must be empty or (eps, theta, alpha_lb)");
  Require(!montecarlo.omegas.empty() && montecarlo.realizations >= 1 &&
              montecarlo.paper_realizations >= 1 && montecarlo.threads >= 0 &&
              montecarlo.ic_half_width >= 0.0,
          "montecarlo needs omegas and realizations >= 1");
  for (double w : montecarlo.omegas) {
    Require(w > 0.0, "montecarlo.omegas must be positive");
  }
  for (const std::string& name : controllers.roster) {
    try {
      CanonicalControllerName(name);
    } catch (const InputError& e) {
      throw ConfigError(std::string("config: controllers.roster: ") + e.what());
    }
  }
}

ExperimentConfig DefaultConfig(PlantType type) {
  ExperimentConfig c;
  c.plant.type = type;
  c.controllers.roster = {"pdp", "lgp_pdp", "nat_pdp", "lgp_nat_pdp",
                          "lgp_var_nat_pdp"};
  for (int i = 0; i <= 8; ++i) c.montecarlo.omegas.push_back(1.0 + 0.5 * i);
  if (type == PlantType::kTwoLink) {
    c.training.position_grids = {
        {1.0, 5, Eigen::Vector2d(1.0, -1.0), Eigen::Vector2d(4.0, 4.0)},
        {1.25, 3, Eigen::Vector2d(1.5, 0.0), Eigen::Vector2d::Zero()}};
    c.training.validation_grid = {1.25, 6, Eigen::Vector2d(1.0, -1.0),
                                  Eigen::Vector2d(4.0, 4.0)};
    c.training.torque_noise = 0.1;
    c.training.accel_noise = M_PI / 180.0;
    c.hyperopt.inertia_points = 9;
    c.reference.amplitude = Eigen::Vector2d::Constant(M_PI / 2.0);
    c.reference.q0 = Eigen::Vector2d::Constant(M_PI / 4.0);
    c.reference.dq0 = Eigen::Vector2d::Zero();
    return c;
  }
  c.plant.soft_robot.rod = dynamics::FemRodParams{};
  c.training.torque_noise = 0.0;
  c.training.accel_noise = 0.0;
  c.training.validation_grid.dq.resize(0);
  c.hyperopt.budget = 40;
  c.hyperopt.kinetic_scale = 1e-3;
  c.hyperopt.elastic_scale = 0.1;
  c.controllers.kp = 1.0;
  c.controllers.kd = 1.0;
  c.controllers.adaptation = {10.0, 1e-3, 10.05};
  Eigen::Vector4d a(1.0, 10.0, 45.0, 90.0);
  a *= M_PI / 180.0;
  c.reference.amplitude = a;
  c.reference.q0 = -a;
  c.reference.dq0 = Eigen::Vector4d::Zero();
  c.integration.dt = 2e-5;
  c.integration.substeps = 4;
  c.integration.record_every = 50;
  c.integration.t_end = 4.0 * M_PI;
  c.integration.window_start = 2.0 * M_PI;
  c.integration.controller_dt["lgp_var_nat_pdp"] = 1.25e-6;
  c.certificate.delta = 0.9556;
  return c;
}

ExperimentConfig ConfigFromJson(const json& doc) {
  Section root(doc, "");
  if (!root.Has("version")) throw ConfigError("config: missing 'version'");
  int version = 0;
  root.Get("version", &version);
  if (version != kConfigVersion) {
    throw ConfigError("config: unsupported version " + std::to_string(version));
  }

  PlantType type = PlantType::kTwoLink;
  if (root.Has("plant") && doc.at("plant").is_object() &&
      doc.at("plant").contains("type")) {
    const json& t = doc.at("plant").at("type");
    if (!t.is_string()) throw ConfigError("config: plant.type must be a string");
    type = ParsePlantType(t.get<std::string>());
  }
  ExperimentConfig c = DefaultConfig(type);

  if (root.Has("plant")) {
    Section p = root.Child("plant");
    std::string ignored;
    p.Get("type", &ignored);
    if (p.Has("two_link")) {
      Section s = p.Child("two_link");
      dynamics::TwoLinkParams& tl = c.plant.two_link.params;
      s.Get("m1", &tl.m1);
      s.Get("m2", &tl.m2);
      s.Get("l1", &tl.l1);
      s.Get("l2", &tl.l2);
      s.Get("gravity", &tl.gravity);
      s.Get("d1", &tl.d1);
      s.Get("d2", &tl.d2);
      s.Get("bias", &c.plant.two_link.bias);
      s.Finish();
    }
    if (p.Has("soft_robot")) {
      Section s = p.Child("soft_robot");
      SoftRobotPlantConfig& sr = c.plant.soft_robot;
      s.Get("n_elems", &sr.n_elems);
      s.Get("paper_n_elems", &sr.paper_n_elems);
      s.Get("reference_n_elems", &sr.reference_n_elems);
      s.Get("total_mass", &sr.rod.total_mass);
      s.Get("total_length", &sr.rod.total_length);
      s.Get("joint_stiffness", &sr.rod.joint_stiffness);
      s.Get("joint_damping", &sr.rod.joint_damping);
      s.Get("gravity", &sr.rod.gravity);
      s.Get("segments", &sr.segments);
      s.Get("sublinks", &sr.sublinks);
      s.Get("bias", &sr.bias);
      s.Finish();
    }
    p.Finish();
  }

  if (root.Has("training")) {
    Section s = root.Child("training");
    TrainingConfig& t = c.training;
    if (s.Has("position_grids")) {
      const json& arr = doc.at("training").at("position_grids");
      if (!arr.is_array()) {
        throw ConfigError("config: training.position_grids must be an array");
      }
      t.position_grids.clear();
      for (size_t i = 0; i < arr.size(); ++i) {
        PositionGrid g;
        ReadGrid(Section(arr[i], "training.position_grids[" + std::to_string(i) + "]"), &g);
        t.position_grids.push_back(g);
      }
      s.Mark("position_grids");
    }
    if (s.Has("velocity_grid")) {
      Section v = s.Child("velocity_grid");
      v.Get("half_width", &t.velocity_grid.half_width);
      v.Get("points", &t.velocity_grid.points);
      v.Finish();
    }
    if (s.Has("validation_grid")) ReadGrid(s.Child("validation_grid"), &t.validation_grid);
    s.Get("torque_noise", &t.torque_noise);
    s.Get("accel_noise", &t.accel_noise);
    s.Get("step_amplitude", &t.step_amplitude);
    s.Get("step_horizon", &t.step_horizon);
    s.Get("step_samples", &t.step_samples);
    s.Get("validation_rate", &t.validation_rate);
    s.Get("step_noise", &t.step_noise);
    s.Get("sim_substeps", &t.sim_substeps);
    s.Get("resim_substeps", &t.resim_substeps);
    s.Finish();
  }

  if (root.Has("hyperopt")) {
    Section s = root.Child("hyperopt");
    s.Get("budget", &c.hyperopt.budget);
    s.Get("initial_step", &c.hyperopt.initial_step);
    s.Get("kinetic_scale", &c.hyperopt.kinetic_scale);
    s.Get("elastic_scale", &c.hyperopt.elastic_scale);
    s.Get("inertia_points", &c.hyperopt.inertia_points);
    s.Get("inertia_half_width", &c.hyperopt.inertia_half_width);
    s.Get("inertia_floor_ratio", &c.hyperopt.inertia_floor_ratio);
    s.Get("inertia_penalty", &c.hyperopt.inertia_penalty);
    s.Finish();
  }

  if (root.Has("controllers")) {
    Section s = root.Child("controllers");
    s.Get("roster", &c.controllers.roster);
    s.Get("kp", &c.controllers.kp);
    s.Get("kd", &c.controllers.kd);
    s.Get("eps_reg", &c.controllers.eps_reg);
    if (s.Has("adaptation")) {
      Section a = s.Child("adaptation");
      a.Get("k1", &c.controllers.adaptation.k1);
      a.Get("k2", &c.controllers.adaptation.k2);
      a.Get("k3", &c.controllers.adaptation.k3);
      a.Finish();
    }
    s.Finish();
  }

  if (root.Has("reference")) {
    Section s = root.Child("reference");
    s.Get("amplitude", &c.reference.amplitude);
    s.Get("omega", &c.reference.omega);
    s.Get("q0", &c.reference.q0);
    s.Get("dq0", &c.reference.dq0);
    s.Finish();
  }

  if (root.Has("integration")) {
    Section s = root.Child("integration");
    s.Get("dt", &c.integration.dt);
    s.Get("substeps", &c.integration.substeps);
    s.Get("record_every", &c.integration.record_every);
    s.Get("t_end", &c.integration.t_end);
    s.Get("window_start", &c.integration.window_start);
    s.Get("controller_dt", &c.integration.controller_dt);
    s.Finish();
  }

  if (root.Has("certificate")) {
    Section s = root.Child("certificate");
    CertificateConfig& k = c.certificate;
    s.Get("delta", &k.delta);
    s.Get("upsilon_lb", &k.upsilon_lb);
    s.Get("grid", &k.grid);
    s.Get("refine_rounds", &k.refine_rounds);
    s.Get("samples", &k.samples);
    s.Get("q_margin", &k.q_margin);
    s.Get("dq_margin", &k.dq_margin);
    s.Get("runs", &k.runs);
    s.Get("q0_std", &k.q0_std);
    s.Get("dq0_mean", &k.dq0_mean);
    s.Get("dq0_std", &k.dq0_std);
    s.Get("t_end", &k.t_end);
    s.Get("anchor", &k.anchor);
    s.Finish();
  }

  if (root.Has("montecarlo")) {
    Section s = root.Child("montecarlo");
    MonteCarloConfig& m = c.montecarlo;
    s.Get("omegas", &m.omegas);
    s.Get("realizations", &m.realizations);
    s.Get("paper_realizations", &m.paper_realizations);
    s.Get("ic_half_width", &m.ic_half_width);
    s.Get("amplitude", &m.amplitude);
    s.Get("divergence_error", &m.divergence_error);
    s.Get("threads", &m.threads);
    s.Finish();
  }

  if (root.Has("output")) {
    Section s = root.Child("output");
    s.Get("dir", &c.output_dir);
    s.Finish();
  }
  root.Get("seed", &c.seed);
  root.Get("paper_scale", &c.paper_scale);
  root.Finish();
  c.Validate();
  return c;
}

json ConfigToJson(const ExperimentConfig& c) {
  json j;
  j["version"] = c.version;
  const dynamics::TwoLinkParams& tl = c.plant.two_link.params;
  const SoftRobotPlantConfig& sr = c.plant.soft_robot;
  j["plant"] = {
      {"type", ToString(c.plant.type)},
      {"two_link",
       {{"m1", tl.m1},
        {"m2", tl.m2},
        {"l1", tl.l1},
        {"l2", tl.l2},
        {"gravity", tl.gravity},
        {"d1", tl.d1},
        {"d2", tl.d2},
        {"bias", Array(c.plant.two_link.bias)}}},
      {"soft_robot",
       {{"n_elems", sr.n_elems},
        {"paper_n_elems", sr.paper_n_elems},
        {"reference_n_elems", sr.reference_n_elems},
        {"total_mass", sr.rod.total_mass},
        {"total_length", sr.rod.total_length},
        {"joint_stiffness", sr.rod.joint_stiffness},
        {"joint_damping", sr.rod.joint_damping},
        {"gravity", sr.rod.gravity},
        {"segments", sr.segments},
        {"sublinks", sr.sublinks},
        {"bias", sr.bias}}}};
  const TrainingConfig& t = c.training;
  json grids = json::array();
  for (const PositionGrid& g : t.position_grids) grids.push_back(GridToJson(g));
  j["training"] = {
      {"position_grids", grids},
      {"velocity_grid",
       {{"half_width", t.velocity_grid.half_width},
        {"points", t.velocity_grid.points}}},
      {"validation_grid", GridToJson(t.validation_grid)},
      {"torque_noise", t.torque_noise},
      {"accel_noise", t.accel_noise},
      {"step_amplitude", t.step_amplitude},
      {"step_horizon", t.step_horizon},
      {"step_samples", t.step_samples},
      {"validation_rate", t.validation_rate},
      {"step_noise", t.step_noise},
      {"sim_substeps", t.sim_substeps},
      {"resim_substeps", t.resim_substeps}};
  j["hyperopt"] = {{"budget", c.hyperopt.budget},
                   {"initial_step", c.hyperopt.initial_step},
                   {"kinetic_scale", c.hyperopt.kinetic_scale},
                   {"elastic_scale", c.hyperopt.elastic_scale},
                   {"inertia_points", c.hyperopt.inertia_points},
                   {"inertia_half_width", c.hyperopt.inertia_half_width},
                   {"inertia_floor_ratio", c.hyperopt.inertia_floor_ratio},
                   {"inertia_penalty", c.hyperopt.inertia_penalty}};
  j["controllers"] = {{"roster", c.controllers.roster},
                      {"kp", c.controllers.kp},
                      {"kd", c.controllers.kd},
                      {"eps_reg", c.controllers.eps_reg},
                      {"adaptation",
                       {{"k1", c.controllers.adaptation.k1},
                        {"k2", c.controllers.adaptation.k2},
                        {"k3", c.controllers.adaptation.k3}}}};
  j["reference"] = {{"amplitude", Array(c.reference.amplitude)},
                    {"omega", c.reference.omega},
                    {"q0", Array(c.reference.q0)},
                    {"dq0", Array(c.reference.dq0)}};
  j["integration"] = {{"dt", c.integration.dt},
                      {"substeps", c.integration.substeps},
                      {"record_every", c.integration.record_every},
                      {"t_end", c.integration.t_end},
                      {"window_start", c.integration.window_start},
                      {"controller_dt", c.integration.controller_dt}};
  const CertificateConfig& k = c.certificate;
  j["certificate"] = {{"delta", k.delta},         {"upsilon_lb", k.upsilon_lb},
                      {"grid", k.grid},           {"refine_rounds", k.refine_rounds},
                      {"samples", k.samples},     {"q_margin", k.q_margin},
                      {"dq_margin", k.dq_margin}, {"runs", k.runs},
                      {"q0_std", k.q0_std},       {"dq0_mean", k.dq0_mean},
                      {"dq0_std", k.dq0_std},     {"t_end", k.t_end},
                      {"anchor", k.anchor}};
  const MonteCarloConfig& m = c.montecarlo;
  j["montecarlo"] = {{"omegas", m.omegas},
                     {"realizations", m.realizations},
                     {"paper_realizations", m.paper_realizations},
                     {"ic_half_width", m.ic_half_width},
                     {"amplitude", m.amplitude},
                     {"divergence_error", m.divergence_error},
                     {"threads", m.threads}};
  j["output"] = {{"dir", c.output_dir}};
  j["seed"] = c.seed;
  j["paper_scale"] = c.paper_scale;
  return j;
}

void ApplyOverride(json* doc, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("config: override must look like key.path=value, got '" +
                      assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json* node = doc;
  std::istringstream in(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(in, key, '.')) {
    if (key.empty()) throw ConfigError("config: empty key in override '" + path + "'");
    keys.push_back(key);
  }
  for (size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->is_object()) {
      throw ConfigError("config: override '" + path + "' crosses a non-object");
    }
    node = &(*node)[keys[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) {
    throw ConfigError("config: override '" + path + "' crosses a non-object");
  }
  (*node)[keys.back()] = value;
}

ExperimentConfig LoadConfig(const std::string& path,
                            const std::vector<std::string>& overrides) {
  json doc = {{"version", kConfigVersion}};
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    doc = json::parse(buf.str(), nullptr, /*allow_exceptions=*/false,
                      /*ignore_comments=*/true);
    if (doc.is_discarded()) throw ConfigError("config: '" + path + "' is not valid JSON");
  }
  for (const std::string& o : overrides) ApplyOverride(&doc, o);
  return ConfigFromJson(doc);
}

}  // namespace harness
}  // namespace lgpctrl
