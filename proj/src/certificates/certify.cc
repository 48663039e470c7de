#include "lgpctrl/certificates/certify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/numerics/linalg.h"
#include "lgpctrl/numerics/spectra.h"

namespace lgpctrl {
namespace certificates {

using Eigen::VectorXd;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

int CertificateTrace::violations() const {
  return static_cast<int>(std::count(violated.begin(), violated.end(), true));
}

int CertificateTrace::region_misses() const {
  return static_cast<int>(std::count(in_region.begin(), in_region.end(), false));
}

CsvTable CertificateTrace::ToCsv() const {
  CsvTable out;
  out.header = {"t", "V", "alpha", "rho", "envelope", "err_norm", "violated"};
  for (int k = 0; k < size(); ++k) {
    out.rows.push_back({t[k], V[k], alpha[k], rho[k], envelope[k], err_norm[k],
                        violated[k] ? 1.0 : 0.0});
  }
  return out;
}

CertificateTrace Certify(const dynamics::Trajectory& traj,
                         const dynamics::LagrangianModel& model,
                         Structure structure, const CertificateParams& params,
                         const std::vector<control::GainSample>& gains,
                         double eps_reg) {
  if (!traj.has_errors()) throw InputError("Certify: trajectory has no errors");
  if (static_cast<int>(gains.size()) != traj.size()) {
    throw InputError("Certify: gain log and trajectory lengths differ");
  }
  CertificateTrace out;
  out.v_floor = VFloor(params);
  const int n = traj.size();
  double integral = 0.0;
  double excess = 0.0;
  bool anchored = false;
  for (int k = 0; k < n; ++k) {
    const VectorXd& q = traj.q[k];
    const VectorXd& e = traj.e[k];
    const VectorXd& de = traj.de[k];
    const FrozenSample s = Freeze(model, structure, q, traj.dq[k], e, de,
                                  gains[k].kp, gains[k].kd, eps_reg);
    const double x_sq = e.squaredNorm() + de.squaredNorm();
    const VectorXd ev = numerics::SymEigenvalues(numerics::SymMatrix(s.M));
    double mu = kInf;
    for (int i = 0; i < ev.size(); ++i) {
      mu = std::min(mu, MuFloor(params.kappa, ev(i), params.eps, s.potential,
                                x_sq));
    }
    const RateResult rate = RateAlpha(s, params);
    const double v = LyapunovV(model, structure, params.kappa, params.eps, q, e, de);

    if (k == 0) {
      out.c0 = mu > 0.0 ? std::sqrt(2.0 * std::max(v - out.v_floor, 0.0) / mu)
                        : kInf;
    }
    const double rho = Radius(params, mu);
    const bool certified = rate.in_region && std::isfinite(rate.alpha) && mu > 0.0;
    double env = kInf;
    if (!certified) {
      anchored = false;
    } else {
      if (!anchored) {
        excess = std::max(v - out.v_floor, 0.0);
        integral = 0.0;
        anchored = true;
      } else {
        integral += 0.5 * (traj.t[k] - traj.t[k - 1]) * (out.alpha.back() + rate.alpha);
      }
      env = excess == 0.0 ? rho : rho + std::sqrt(2.0 * excess / mu) * std::exp(-integral);
    }
    const double err = std::sqrt(x_sq);

    out.t.push_back(traj.t[k]);
    out.V.push_back(v);
    out.alpha.push_back(rate.alpha);
    out.rho.push_back(rho);
    out.envelope.push_back(env);
    out.err_norm.push_back(err);
    out.mu_lb.push_back(mu);
    out.in_region.push_back(certified);
    out.violated.push_back(certified && !(err <= env * (1.0 + 1e-12)));
  }
  return out;
}

double UpsilonFloor(const CertificateParams& p) {
  const WorstCaseBounds& b = p.bounds;
  const double a = p.eps * (b.kp_lo - 0.5 * p.theta) - p.alpha_lb * p.kappa;
  const double bb = b.kp_lo + p.eps * b.d_lo() - p.kappa;
  const double gamma = b.d_lo() - 0.5 * p.phi;
  // λ⁻(Υ) is concave in m̂, so its minimum over [m̲̂, m̄̂] is at an end point.
  return std::min(
      numerics::UpsilonEigLower(a, bb, gamma, p.eps, p.alpha_lb, b.m_lo),
      numerics::UpsilonEigLower(a, bb, gamma, p.eps, p.alpha_lb, b.m_hi));
}

double MetricFloor(const CertificateParams& p) {
  // λ⁻(κ, m̂) is concave in m̂; the floor over [m̲̂, m̄̂] sits at an end point.
  return std::min(numerics::MetricEigLower(p.kappa, p.bounds.m_lo, p.eps),
                  numerics::MetricEigLower(p.kappa, p.bounds.m_hi, p.eps));
}

double WorstCaseRadius(const CertificateParams& p) {
  return Radius(p, MetricFloor(p));
}

namespace {

struct Evaluation {
  bool feasible{false};
  double objective{kInf};
  double rho{kInf};
  double upsilon{0.0};
  std::vector<std::string> rejected;
};

Evaluation Evaluate(const WorstCaseBounds& b, const OptimizeOptions& o,
                    double eps, double theta, double alpha) {
  Evaluation ev;
  const CertificateParams p = MakeParams(b, eps, theta, alpha);
  if (!(p.kappa > 0.0)) ev.rejected.push_back("kappa > 0");
  if (!(p.phi > 0.0)) ev.rejected.push_back("phi > 0");
  if (p.kappa > 0.0 && !(eps < std::sqrt(p.kappa / b.m_hi))) {
    ev.rejected.push_back("eps < sqrt(kappa/m_hi)");
  }
  if (!ev.rejected.empty()) return ev;
  ev.upsilon = UpsilonFloor(p);
  if (!(ev.upsilon >= o.upsilon_lb)) ev.rejected.push_back("upsilon floor");
  ev.rho = WorstCaseRadius(p);
  if (!std::isfinite(ev.rho)) ev.rejected.push_back("metric floor > 0");
  if (o.require_theorem) {
    for (const auto& name : CheckFeasibility(b, eps, theta, alpha).violated()) {
      ev.rejected.push_back(name);
    }
  }
  if (!ev.rejected.empty()) return ev;
  ev.feasible = true;
  ev.objective = ev.rho + 1.0 / alpha;
  return ev;
}

}  // namespace

OptimizeResult OptimizeCertParams(const WorstCaseBounds& b,
                                  const OptimizeOptions& o) {
  b.Validate();
  if (o.grid < 2 || o.refine_rounds < 0) {
    throw InputError("OptimizeCertParams: grid >= 2 and refine_rounds >= 0");
  }
  const double lo[3] = {std::log(o.eps_range[0]), std::log(o.theta_range[0]),
                        std::log(o.alpha_range[0])};
  const double hi[3] = {std::log(o.eps_range[1]), std::log(o.theta_range[1]),
                        std::log(o.alpha_range[1])};
  for (int i = 0; i < 3; ++i) {
    if (!(hi[i] > lo[i])) throw InputError("OptimizeCertParams: empty range");
  }

  std::map<std::string, int> rejections;
  double best_x[3] = {0, 0, 0};
  Evaluation best;
  auto consider = [&](const double x[3]) {
    Evaluation ev =
        Evaluate(b, o, std::exp(x[0]), std::exp(x[1]), std::exp(x[2]));
    for (const auto& r : ev.rejected) ++rejections[r];
    if (ev.feasible && ev.objective < best.objective) {
      best = ev;
      std::copy(x, x + 3, best_x);
    }
  };

  double x[3];
  for (int i = 0; i < o.grid; ++i) {
    x[0] = lo[0] + (hi[0] - lo[0]) * i / (o.grid - 1);
    for (int j = 0; j < o.grid; ++j) {
      x[1] = lo[1] + (hi[1] - lo[1]) * j / (o.grid - 1);
      for (int k = 0; k < o.grid; ++k) {
        x[2] = lo[2] + (hi[2] - lo[2]) * k / (o.grid - 1);
        consider(x);
      }
    }
  }

  OptimizeResult out;
  if (!best.feasible) {
    std::vector<std::pair<int, std::string>> ranked;
    for (const auto& [name, count] : rejections) ranked.push_back({-count, name});
    std::sort(ranked.begin(), ranked.end());
    for (size_t i = 0; i < ranked.size() && i < 3; ++i) {
      out.binding.push_back(ranked[i].second);
    }
    return out;
  }

  // Coordinate pattern search in log space, halving the step on failure.
  double step[3];
  for (int i = 0; i < 3; ++i) step[i] = (hi[i] - lo[i]) / (o.grid - 1);
  for (int round = 0; round < o.refine_rounds; ++round) {
    bool improved = false;
    for (int i = 0; i < 3; ++i) {
      for (double dir : {1.0, -1.0}) {
        double trial[3] = {best_x[0], best_x[1], best_x[2]};
        trial[i] += dir * step[i];
        const double before = best.objective;
        consider(trial);
        if (best.objective < before) {
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      for (double& s : step) s *= 0.5;
    }
  }

  out.feasible = true;
  out.params = MakeParams(b, std::exp(best_x[0]), std::exp(best_x[1]),
                          std::exp(best_x[2]));
  out.objective = best.objective;
  out.rho_worst = best.rho;
  out.upsilon_min = best.upsilon;
  return out;
}

}  // namespace certificates
}  // namespace lgpctrl
