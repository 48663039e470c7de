#include "lgpctrl/harness/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace harness {

namespace {

// √∫f² over samples (t_k, f_k).
double L2(const std::vector<double>& t, const std::vector<double>& f, double dt) {
  if (f.size() == 1) return std::abs(f[0]) * std::sqrt(dt);
  double acc = 0.0;
  for (size_t k = 1; k < f.size(); ++k) {
    acc += 0.5 * (t[k] - t[k - 1]) * (f[k - 1] * f[k - 1] + f[k] * f[k]);
  }
  return std::sqrt(acc);
}

double Max(const std::vector<double>& f) {
  return *std::max_element(f.begin(), f.end());
}

double Mean(const std::vector<double>& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s / f.size();
}

}  // namespace

MetricsRow ComputeMetrics(const dynamics::Trajectory& traj, double window_start,
                          const std::string& controller) {
  if (!traj.has_errors()) throw InputError("ComputeMetrics: no error record");
  const double tol = 1e-9 * std::max(traj.dt, 1e-300);
  std::vector<double> t, tau, e, de, x;
  for (int k = 0; k < traj.size(); ++k) {
    if (traj.t[k] < window_start - tol) continue;
    t.push_back(traj.t[k]);
    tau.push_back(traj.tau[k].norm());
    e.push_back(traj.e[k].norm());
    de.push_back(traj.de[k].norm());
    x.push_back(std::hypot(e.back(), de.back()));
  }
  if (t.empty()) throw InputError("ComputeMetrics: empty window");

  MetricsRow row;
  row.controller = controller;
  row.samples = static_cast<int>(t.size());
  row.diverged = traj.diverged;
  row.tau_l2 = L2(t, tau, traj.dt);
  row.tau_max = Max(tau);
  row.tau_mean = Mean(tau);
  row.x_l2 = L2(t, x, traj.dt);
  row.e_max = Max(e);
  row.de_max = Max(de);
  row.e_mean = Mean(e);
  row.de_mean = Mean(de);
  return row;
}

MetricsRow DivergedRow(const std::string& controller) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  MetricsRow row;
  row.controller = controller;
  row.diverged = true;
  row.tau_l2 = row.tau_max = row.tau_mean = kInf;
  row.x_l2 = row.e_max = row.de_max = row.e_mean = row.de_mean = kInf;
  return row;
}

}  // namespace harness
}  // namespace lgpctrl
