#include "lgpctrl/harness/monte_carlo.h"

#include <cmath>
#include <limits>

#include "lgpctrl/harness/parallel.h"

namespace lgpctrl {
namespace harness {

using Eigen::VectorXd;

namespace {

constexpr std::uint64_t kMonteCarloStream = 3;

struct Outcome {
  bool diverged{false};
  double x_l2{0.0};
  double tau_l2{0.0};
};

void MeanStd(const std::vector<double>& v, double* mean, double* std) {
  *mean = 0.0;
  *std = 0.0;
  if (v.empty()) return;
  for (double x : v) *mean += x / v.size();
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - *mean) * (x - *mean);
  *std = std::sqrt(ss / (v.size() - 1));
}

}  // namespace

double MonteCarloResult::onset(const std::string& controller) const {
  for (const MonteCarloCell& c : cells) {
    if (c.controller == controller && c.diverged > 0) return c.omega;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

int MonteCarloResult::total_divergences(const std::string& controller) const {
  int n = 0;
  for (const MonteCarloCell& c : cells) {
    if (c.controller == controller) n += c.diverged;
  }
  return n;
}

MonteCarloResult RunMonteCarlo(const ExperimentConfig& config, const Plant& plant,
                               const std::shared_ptr<const lgp::LgpModel>& model) {
  const MonteCarloConfig& mc = config.montecarlo;
  const int n = plant.dof();
  const int omegas = static_cast<int>(mc.omegas.size());
  const int reps = config.realizations();
  std::vector<std::string> names;
  std::vector<control::ControllerSpec> specs;
  for (const std::string& name : config.controllers.roster) {
    names.push_back(CanonicalControllerName(name));
    specs.push_back(MakeControllerSpec(names.back(), config, plant, model));
  }
  const int ctls = static_cast<int>(names.size());

  // Initial states depend only on (seed, ω index, realization).
  std::vector<dynamics::JointState> starts(omegas * reps);
  for (int w = 0; w < omegas; ++w) {
    for (int r = 0; r < reps; ++r) {
      std::mt19937_64 rng = MakeRng(
          config.seed, {kMonteCarloStream, static_cast<std::uint64_t>(w),
                        static_cast<std::uint64_t>(r)});
      std::uniform_real_distribution<double> u(-mc.ic_half_width, mc.ic_half_width);
      dynamics::JointState x{VectorXd(n), VectorXd(n)};
      for (int i = 0; i < n; ++i) x.q(i) = u(rng);
      for (int i = 0; i < n; ++i) x.dq(i) = u(rng);
      starts[w * reps + r] = x;
    }
  }

  std::vector<Outcome> outcomes(omegas * reps * ctls);
  ParallelFor(static_cast<int>(outcomes.size()), mc.threads, [&](int task) {
    const int c = task % ctls;
    const int r = (task / ctls) % reps;
    const int w = task / (ctls * reps);
    const double omega = mc.omegas[w];
    const control::Reference ref = control::Reference::Sine(
        VectorXd::Constant(n, mc.amplitude), omega);
    const Run run = Simulate(config, plant, names[c], specs[c], ref,
                             starts[w * reps + r], 8.0 * M_PI / omega);
    Outcome& out = outcomes[task];
    if (run.traj.diverged) {
      out.diverged = true;
      return;
    }
    const MetricsRow row = ComputeMetrics(run.traj, 4.0 * M_PI / omega, names[c]);
    out.diverged = !(row.e_max <= mc.divergence_error);
    out.x_l2 = row.x_l2;
    out.tau_l2 = row.tau_l2;
  });

  MonteCarloResult result;
  for (int w = 0; w < omegas; ++w) {
    for (int c = 0; c < ctls; ++c) {
      MonteCarloCell cell;
      cell.omega = mc.omegas[w];
      cell.controller = names[c];
      cell.realizations = reps;
      std::vector<double> x, tau;
      for (int r = 0; r < reps; ++r) {
        const Outcome& o = outcomes[(w * reps + r) * ctls + c];
        if (o.diverged) {
          ++cell.diverged;
        } else {
          ++cell.converged;
          x.push_back(o.x_l2);
          tau.push_back(o.tau_l2);
        }
      }
      MeanStd(x, &cell.x_l2_mean, &cell.x_l2_std);
      MeanStd(tau, &cell.tau_l2_mean, &cell.tau_l2_std);
      result.cells.push_back(cell);
    }
  }
  return result;
}

}  // namespace harness
}  // namespace lgpctrl
