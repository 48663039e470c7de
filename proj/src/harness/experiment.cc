#include "lgpctrl/harness/experiment.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/dynamics/integrator.h"
#include "lgpctrl/dynamics/two_link.h"
#include "lgpctrl/harness/parallel.h"
#include "lgpctrl/numerics/linalg.h"

namespace lgpctrl {
namespace harness {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using dynamics::JointState;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Purpose tags for derived random streams.
enum StreamTag : std::uint64_t { kTrainingStream = 1, kCertificateStream = 2 };

dynamics::FemRodParams RodParams(const ExperimentConfig& c) {
  dynamics::FemRodParams reference = c.plant.soft_robot.rod;
  reference.n_elems = c.plant.soft_robot.reference_n_elems;
  return dynamics::RescaledFemRodParams(reference, c.fem_elems());
}

// Cartesian product of `points` equidistant values on [−a, a] per coordinate.
std::vector<VectorXd> Grid(int dof, double a, int points) {
  std::vector<double> axis(points);
  for (int i = 0; i < points; ++i) {
    axis[i] = points == 1 ? 0.0 : -a + 2.0 * a * i / (points - 1);
  }
  std::vector<VectorXd> out;
  std::vector<int> idx(dof, 0);
  while (true) {
    VectorXd x(dof);
    for (int d = 0; d < dof; ++d) x(d) = axis[idx[d]];
    out.push_back(x);
    int d = dof - 1;
    while (d >= 0 && ++idx[d] == points) idx[d--] = 0;
    if (d < 0) break;
  }
  return out;
}

struct Rows {
  std::vector<VectorXd> q, dq, ddq;
  void Add(const VectorXd& a, const VectorXd& b, const VectorXd& c) {
    q.push_back(a);
    dq.push_back(b);
    ddq.push_back(c);
  }
};

// Noisy torque observations of the plant at the given inputs.
lgp::TrainingSet Observe(const dynamics::LagrangianModel& plant, const Rows& rows,
                         double torque_noise, double accel_noise,
                         std::mt19937_64* rng) {
  const int n = plant.dof();
  const int d = static_cast<int>(rows.q.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  lgp::TrainingSet ts;
  ts.q.resize(d, n);
  ts.dq.resize(d, n);
  ts.ddq.resize(d, n);
  ts.y.resize(d, n);
  ts.torque_noise_std = torque_noise;
  ts.accel_noise_std = accel_noise;
  for (int i = 0; i < d; ++i) {
    VectorXd acc = rows.ddq[i];
    for (int k = 0; k < n; ++k) acc(k) += accel_noise * normal(*rng);
    VectorXd y = dynamics::InverseDynamics(plant.Components(rows.q[i], rows.dq[i]),
                                           rows.dq[i], acc);
    for (int k = 0; k < n; ++k) y(k) += torque_noise * normal(*rng);
    ts.q.row(i) = rows.q[i].transpose();
    ts.dq.row(i) = rows.dq[i].transpose();
    ts.ddq.row(i) = rows.ddq[i].transpose();
    ts.y.row(i) = y.transpose();
  }
  return ts;
}

Dataset TwoLinkData(const ExperimentConfig& c, const Plant& plant,
                    std::mt19937_64* rng) {
  const TrainingConfig& t = c.training;
  const int n = plant.dof();
  Rows train;
  for (const PositionGrid& g : t.position_grids) {
    for (const VectorXd& q : Grid(n, g.half_width, g.points)) train.Add(q, g.dq, g.ddq);
  }
  if (t.velocity_grid.points > 0) {
    for (const VectorXd& dq :
         Grid(n, t.velocity_grid.half_width, t.velocity_grid.points)) {
      train.Add(VectorXd::Zero(n), dq, VectorXd::Zero(n));
    }
  }
  if (train.q.empty()) throw InputError("BuildTrainingSet: empty recipe");
  Rows validation;
  const PositionGrid& v = t.validation_grid;
  for (const VectorXd& q : Grid(n, v.half_width, v.points)) validation.Add(q, v.dq, v.ddq);

  Dataset data;
  data.train = Observe(*plant.truth, train, t.torque_noise, t.accel_noise, rng);
  data.validation =
      Observe(*plant.truth, validation, t.torque_noise, t.accel_noise, rng);
  return data;
}

Dataset SoftRobotData(const ExperimentConfig& c, const Plant& plant,
                      std::mt19937_64* rng) {
  const TrainingConfig& t = c.training;
  const dynamics::CcMap& map = *plant.cc;
  const VectorXd tau_fem = VectorXd::Constant(map.n_elems(), t.step_amplitude);
  dynamics::FunctionController step(
      [&](double, const JointState&) { return tau_fem; });
  const JointState rest{VectorXd::Zero(map.n_elems()), VectorXd::Zero(map.n_elems())};
  dynamics::IntegrateOptions opts;
  opts.substeps = t.sim_substeps;
  const dynamics::Trajectory traj = dynamics::Integrate(
      *plant.truth, &step, rest, t.step_horizon, 1.0 / t.validation_rate, opts);
  if (traj.diverged) throw InputError("BuildTrainingSet: step response diverged");

  Dataset data;
  StepResponse& r = data.response;
  r.tau = map.matrix().transpose() * tau_fem;
  for (int k = 0; k < traj.size(); ++k) {
    const JointState fem{traj.q[k], traj.dq[k]};
    const JointState cc = map.Reduce(fem);
    r.t.push_back(traj.t[k]);
    r.q.push_back(cc.q);
    r.dq.push_back(cc.dq);
  }
  // Accelerations as seen by the sampled sensor: differences of q̇ on the grid.
  const int samples = static_cast<int>(r.t.size());
  const double h = traj.dt;
  for (int k = 0; k < samples; ++k) {
    const int lo = std::max(k - 1, 0);
    const int hi = std::min(k + 1, samples - 1);
    r.ddq.push_back((r.dq[hi] - r.dq[lo]) / ((hi - lo) * h));
  }

  const int m = traj.size();
  const int d = std::min(t.step_samples, m);
  const int n = plant.dof();
  const double sigma = t.step_noise * t.step_amplitude;
  std::normal_distribution<double> normal(0.0, 1.0);
  lgp::TrainingSet& ts = data.train;
  ts.q.resize(d, n);
  ts.dq.resize(d, n);
  ts.ddq.resize(d, n);
  ts.y.resize(d, n);
  ts.torque_noise_std = sigma;
  ts.accel_noise_std = 0.0;
  for (int j = 0; j < d; ++j) {
    const int k = d == 1 ? 0 : static_cast<int>(std::lround(1.0 * j * (m - 1) / (d - 1)));
    ts.q.row(j) = r.q[k].transpose();
    ts.dq.row(j) = r.dq[k].transpose();
    ts.ddq.row(j) = r.ddq[k].transpose();
    for (int i = 0; i < n; ++i) ts.y(j, i) = r.tau(i) + sigma * normal(*rng);
  }
  return data;
}

}  // namespace

JointState Plant::Embed(const JointState& x) const {
  if (!cc) return x;
  return {cc->Embed(x.q), cc->matrix() * x.dq};
}

Plant MakePlant(const ExperimentConfig& c) {
  c.Validate();
  Plant p;
  p.type = c.plant.type;
  if (c.plant.type == PlantType::kTwoLink) {
    const TwoLinkPlantConfig& t = c.plant.two_link;
    p.truth = std::make_shared<dynamics::TwoLink>(t.params);
    p.estimate = std::make_shared<dynamics::TwoLink>(
        dynamics::BiasedTwoLinkParams(t.params, t.bias(0), t.bias(1)));
    return p;
  }
  const SoftRobotPlantConfig& s = c.plant.soft_robot;
  const dynamics::FemRodParams rod = RodParams(c);
  p.truth = dynamics::MakeFemRod(rod);
  p.estimate = dynamics::MakeCcChain(
      dynamics::BiasedCcChainParams(rod, s.segments, s.sublinks, s.bias));
  p.cc.emplace(s.segments, rod.n_elems);
  return p;
}

std::mt19937_64 MakeRng(std::uint64_t seed,
                        std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words = {static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  for (std::uint64_t t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

Dataset BuildTrainingSet(const ExperimentConfig& c, const Plant& plant,
                         std::mt19937_64* rng) {
  if (plant.type != c.plant.type) {
    throw InputError("BuildTrainingSet: plant does not match the config");
  }
  return plant.type == PlantType::kTwoLink ? TwoLinkData(c, plant, rng)
                                           : SoftRobotData(c, plant, rng);
}

lgp::Hyperparams InitialHyperparams(const ExperimentConfig& c, int dof) {
  const bool soft = c.plant.type == PlantType::kSoftRobot;
  lgp::Hyperparams h = lgp::Hyperparams::Default(dof, /*elastic=*/soft, /*symmetric=*/soft);
  h.kin_diag *= c.hyperopt.kinetic_scale;
  h.kin_offdiag *= c.hyperopt.kinetic_scale;
  h.el_diag *= c.hyperopt.elastic_scale;
  h.el_offdiag *= c.hyperopt.elastic_scale;
  return h;
}

double ResimulationRmse(const dynamics::LagrangianModel& model,
                        const StepResponse& response, int substeps) {
  const int m = static_cast<int>(response.t.size());
  if (m < 2) throw InputError("ResimulationRmse: need at least two samples");
  const int n = model.dof();
  dynamics::FunctionController step(
      [&](double, const JointState&) { return response.tau; });
  dynamics::IntegrateOptions opts;
  opts.substeps = substeps;
  const double dt = response.t[1] - response.t[0];
  const dynamics::Trajectory traj = dynamics::Integrate(
      model, &step, {VectorXd::Zero(n), VectorXd::Zero(n)}, response.t.back(),
      dt, opts);
  if (traj.diverged || traj.size() != m) return kInf;
  double acc = 0.0;
  for (int k = 0; k < m; ++k) acc += (traj.q[k] - response.q[k]).squaredNorm();
  return std::sqrt(acc / (m * n));
}

namespace {

std::vector<VectorXd> InertiaGrid(const ExperimentConfig& c, int dof) {
  const HyperoptConfig& h = c.hyperopt;
  if (h.inertia_points == 0) return {};
  const double w = h.inertia_half_width > 0.0
                       ? h.inertia_half_width
                       : c.reference.amplitude.cwiseAbs().maxCoeff() + c.certificate.q_margin;
  return Grid(dof, w, h.inertia_points);
}

double MinInertiaEigenvalue(const dynamics::LagrangianModel& model,
                            const std::vector<VectorXd>& grid) {
  double lo = kInf;
  for (const VectorXd& q : grid) {
    const VectorXd zero = VectorXd::Zero(q.size());
    lo = std::min(lo, numerics::MinEigenvalue(
                          numerics::SymMatrix(model.Components(q, zero).M)));
  }
  return lo;
}

}  // namespace

FitResult FitModel(const ExperimentConfig& c, const Plant& plant,
                   const Dataset& data) {
  const lgp::Hyperparams initial = InitialHyperparams(c, plant.dof());
  lgp::HyperoptOptions opts;
  opts.budget = c.hyperopt.budget;
  opts.initial_step = c.hyperopt.initial_step;
  const std::shared_ptr<const dynamics::LagrangianModel> prior = plant.estimate;

  const std::vector<VectorXd> grid = InertiaGrid(c, plant.dof());
  const double floor =
      grid.empty() ? 0.0
                   : c.hyperopt.inertia_floor_ratio * MinInertiaEigenvalue(*prior, grid);
  // Graded, so the search can walk back into the admissible set.
  auto penalty = [&](const dynamics::LagrangianModel& model) {
    if (grid.empty()) return 0.0;
    return c.hyperopt.inertia_penalty *
           std::max(0.0, floor - MinInertiaEigenvalue(model, grid));
  };

  FitResult out;
  if (plant.type == PlantType::kTwoLink) {
    out.hyper = lgp::OptimizeHyper(
        [&](const lgp::Hyperparams& h) {
          const lgp::LgpModel model(data.train, h, prior);
          double sse = 0.0;
          for (const lgp::TrainingSet* set : {&data.train, &data.validation}) {
            for (int i = 0; i < set->size(); ++i) {
              sse += (model.PredictTau(set->input(i)) - set->y.row(i).transpose())
                         .squaredNorm();
            }
          }
          return sse + penalty(model);
        },
        initial, opts);
    out.model = lgp::Fit(data.train, out.hyper.best, prior);
    out.prior_rmse = lgp::TorqueRmse(*prior, data.validation);
    out.model_rmse = lgp::TorqueRmse(*out.model, data.validation);
    return out;
  }
  const int substeps = c.training.resim_substeps;
  out.hyper = lgp::OptimizeHyper(
      [&](const lgp::Hyperparams& h) {
        const lgp::LgpModel model(data.train, h, prior);
        const double r = ResimulationRmse(model, data.response, substeps);
        return r * r + penalty(model);
      },
      initial, opts);
  out.model = lgp::Fit(data.train, out.hyper.best, prior);
  out.prior_rmse = ResimulationRmse(*prior, data.response, substeps);
  out.model_rmse = ResimulationRmse(*out.model, data.response, substeps);
  return out;
}

std::string CanonicalControllerName(const std::string& name) {
  std::string s;
  for (char ch : name) s += ch == '-' ? '_' : static_cast<char>(std::tolower(ch));
  if (s == "var_nat_pdp") s = "lgp_var_nat_pdp";
  for (const std::string& known : ControllerNames()) {
    if (s == known) return s;
  }
  throw InputError("unknown controller '" + name + "'");
}

std::string ControllerLabel(const std::string& canonical) {
  if (canonical == "pdp") return "PD+";
  if (canonical == "lgp_pdp") return "L-GP-PD+";
  if (canonical == "nat_pdp") return "nat-PD+";
  if (canonical == "lgp_nat_pdp") return "L-GP nat-PD+";
  if (canonical == "lgp_var_nat_pdp") return "L-GP var-nat-PD+";
  return canonical;
}

bool UsesLearnedModel(const std::string& canonical) {
  return canonical.rfind("lgp_", 0) == 0;
}

control::ControllerSpec MakeControllerSpec(
    const std::string& name, const ExperimentConfig& c, const Plant& plant,
    const std::shared_ptr<const lgp::LgpModel>& model) {
  const std::string canonical = CanonicalControllerName(name);
  const int n = plant.dof();
  control::ControllerSpec spec;
  if (UsesLearnedModel(canonical)) {
    if (!model) throw InputError("controller '" + canonical + "' needs a learned model");
    spec.model = model;
  } else {
    spec.model = plant.estimate;
  }
  if (canonical == "pdp" || canonical == "lgp_pdp") {
    spec.kind = control::ControllerKind::kPdp;
  } else if (canonical == "lgp_var_nat_pdp") {
    spec.kind = control::ControllerKind::kVarNatPdp;
    const AdaptationConfig& a = c.controllers.adaptation;
    spec.adaptation = control::GainAdaptation::Scalar(n, a.k1, a.k2, a.k3);
  } else {
    spec.kind = control::ControllerKind::kNatPdp;
  }
  spec.kp = c.controllers.kp * MatrixXd::Identity(n, n);
  spec.kd = c.controllers.kd * MatrixXd::Identity(n, n);
  spec.eps_reg = c.controllers.eps_reg;
  spec.Validate();
  return spec;
}

control::Reference MakeReference(const ExperimentConfig& c) {
  return control::Reference::Sine(c.reference.amplitude, c.reference.omega);
}

Run Simulate(const ExperimentConfig& c, const Plant& plant,
             const std::string& name, const control::ControllerSpec& spec,
             const control::Reference& ref, const JointState& x0, double t_end) {
  control::TrackingController ctl(spec, ref);
  dynamics::Controller* outer = &ctl;
  std::optional<control::CcAdapter> adapter;
  if (plant.cc) {
    adapter.emplace(*plant.cc, &ctl);
    outer = &*adapter;
  }
  const Sampling sampling = SamplingFor(c.integration, CanonicalControllerName(name));
  dynamics::IntegrateOptions opts;
  opts.substeps = sampling.substeps;
  opts.record_every = sampling.record_every;
  Run run;
  run.name = name;
  run.traj = dynamics::Integrate(*plant.truth, outer, plant.Embed(x0), t_end,
                                 sampling.dt, opts);
  run.gains = ctl.log();
  // A non-finite torque is logged but not recorded.
  run.gains.resize(std::min<size_t>(run.gains.size(), run.traj.size()));
  return run;
}

BenchmarkResult RunBenchmark(const ExperimentConfig& c, const Plant& plant,
                             const std::shared_ptr<const lgp::LgpModel>& model) {
  const control::Reference ref = MakeReference(c);
  const JointState x0{c.reference.q0, c.reference.dq0};
  const int count = static_cast<int>(c.controllers.roster.size());
  std::vector<control::ControllerSpec> specs;
  std::vector<std::string> names;
  for (const std::string& name : c.controllers.roster) {
    names.push_back(CanonicalControllerName(name));
    specs.push_back(MakeControllerSpec(names.back(), c, plant, model));
  }
  BenchmarkResult out;
  out.runs.resize(count);
  out.rows.resize(count);
  ParallelFor(count, c.montecarlo.threads, [&](int i) {
    out.runs[i] = Simulate(c, plant, names[i], specs[i], ref, x0, c.integration.t_end);
    const dynamics::Trajectory& traj = out.runs[i].traj;
    out.rows[i] = traj.diverged ? DivergedRow(names[i])
                                : ComputeMetrics(traj, c.integration.window_start,
                                                 names[i]);
  });
  return out;
}

CertificateSetup PrepareCertificate(const ExperimentConfig& c,
                                    const control::ControllerSpec& spec,
                                    const control::Reference& ref) {
  CertificateSetup setup;
  setup.structure = certificates::StructureOf(spec.kind);
  certificates::SamplingOptions sampling;
  sampling.t_end = c.certificate.t_end;
  sampling.samples = c.certificate.samples;
  sampling.q_margin = c.certificate.q_margin;
  sampling.dq_margin = c.certificate.dq_margin;
  sampling.seed = c.seed;
  setup.bounds = certificates::SampleBounds(*spec.model, ref, setup.structure,
                                            certificates::FloorsOf(spec),
                                            c.certificate.delta, sampling);
  certificates::OptimizeOptions opts;
  opts.upsilon_lb = c.certificate.upsilon_lb;
  opts.grid = c.certificate.grid;
  opts.refine_rounds = c.certificate.refine_rounds;
  setup.optimum = certificates::OptimizeCertParams(setup.bounds, opts);
  return setup;
}

certificates::CertificateTrace CertifyRun(const ExperimentConfig& c,
                                          const control::ControllerSpec& spec,
                                          const CertificateSetup& setup,
                                          const Run& run) {
  if (!setup.optimum.feasible) {
    std::string why;
    for (const std::string& b : setup.optimum.binding) why += " [" + b + "]";
    throw InfeasibleError("no feasible certificate parameters:" + why);
  }
  return certificates::Certify(run.traj, *spec.model, setup.structure,
                               setup.optimum.params, run.gains, spec.eps_reg);
}

int CertificationStudy::violations() const {
  int v = 0;
  for (const auto& t : traces) v += t.violations();
  return v;
}

int CertificationStudy::region_misses() const {
  int v = 0;
  for (const auto& t : traces) v += t.region_misses();
  return v;
}

CertificationStudy RunCertificationStudy(
    const ExperimentConfig& c, const Plant& plant,
    const std::shared_ptr<const lgp::LgpModel>& model, const std::string& name) {
  const control::ControllerSpec spec = MakeControllerSpec(name, c, plant, model);
  const control::Reference ref = MakeReference(c);
  CertificationStudy study;
  study.setup = PrepareCertificate(c, spec, ref);
  if (!study.setup.optimum.feasible) {
    std::string why;
    for (const std::string& b : study.setup.optimum.binding) why += " [" + b + "]";
    throw InfeasibleError("no feasible certificate parameters:" + why);
  }

  const int n = plant.dof();
  const CertificateConfig& k = c.certificate;
  std::mt19937_64 rng = MakeRng(c.seed, {kCertificateStream});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<JointState> starts;
  for (int r = 0; r < k.runs; ++r) {
    JointState x{VectorXd(n), VectorXd(n)};
    for (int i = 0; i < n; ++i) x.q(i) = k.q0_std * normal(rng);
    for (int i = 0; i < n; ++i) x.dq(i) = k.dq0_mean + k.dq0_std * normal(rng);
    starts.push_back(x);
  }
  const std::string canonical = CanonicalControllerName(name);
  study.runs.resize(k.runs);
  study.traces.resize(k.runs);
  ParallelFor(k.runs, c.montecarlo.threads, [&](int r) {
    study.runs[r] = Simulate(c, plant, canonical, spec, ref, starts[r], k.t_end);
    study.traces[r] = CertifyRun(c, spec, study.setup, study.runs[r]);
  });
  return study;
}

Dataset BuildTrainingSet(const ExperimentConfig& c, const Plant& plant) {
  std::mt19937_64 rng = MakeRng(c.seed, {kTrainingStream});
  return BuildTrainingSet(c, plant, &rng);
}

}  // namespace harness
}  // namespace lgpctrl
