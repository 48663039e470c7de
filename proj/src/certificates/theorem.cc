#include "lgpctrl/certificates/theorem.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lgpctrl/common/csv.h"
#include "lgpctrl/common/errors.h"
#include "lgpctrl/control/primitives.h"
#include "lgpctrl/numerics/linalg.h"
#include "lgpctrl/numerics/spectra.h"

namespace lgpctrl {
namespace certificates {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

control::GainBounds GainIntervals(const control::GainAdaptation& gain,
                                  double sigma_dot_lo, double sigma_dot_hi) {
  return gain.Bounds(sigma_dot_lo, sigma_dot_hi);
}

KappaPhi ComputeKappaPhi(const WorstCaseBounds& b, double eps, double theta,
                         double alpha_lb) {
  const double d = b.d_lo(), ms = b.m_sum();
  KappaPhi out;
  out.kappa = b.kp_lo + eps * (d - alpha_lb * ms);
  out.phi = 2.0 * (d - eps * (b.kp_lo - 0.5 * theta) + alpha_lb * out.kappa) -
            (eps + alpha_lb) * ms;
  return out;
}

CertificateParams MakeParams(const WorstCaseBounds& b, double eps,
                             double theta, double alpha_lb) {
  const KappaPhi kp = ComputeKappaPhi(b, eps, theta, alpha_lb);
  CertificateParams p;
  p.eps = eps;
  p.theta = theta;
  p.alpha_lb = alpha_lb;
  p.kappa = kp.kappa;
  p.phi = kp.phi;
  p.bounds = b;
  return p;
}

bool FeasibilityReport::ok() const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const Constraint& c) { return c.satisfied; });
}

std::vector<std::string> FeasibilityReport::violated() const {
  std::vector<std::string> out;
  for (const auto& c : constraints) {
    if (!c.satisfied) out.push_back(c.name);
  }
  return out;
}

std::string FeasibilityReport::ToString() const {
  std::ostringstream os;
  for (const auto& c : constraints) {
    os << c.name << ": value " << FormatDouble(c.value) << ", limit "
       << FormatDouble(c.limit) << ", " << (c.satisfied ? "ok" : "VIOLATED")
       << "\n";
  }
  return os.str();
}

FeasibilityReport CheckFeasibility(const WorstCaseBounds& b, double eps,
                                   double theta, double alpha_lb) {
  const double d = b.d_lo(), ms = b.m_sum(), kp = b.kp_lo, mh = b.m_hi;
  FeasibilityReport r;
  auto below = [&r](std::string name, double value, double limit) {
    r.constraints.push_back({std::move(name), value, limit, value < limit});
  };
  auto above = [&r](std::string name, double value, double limit) {
    r.constraints.push_back({std::move(name), value, limit, value > limit});
  };
  above("eps > 0", eps, 0.0);
  above("theta > 0", theta, 0.0);
  above("alpha_lb > 0", alpha_lb, 0.0);

  const double denom1 = kp - 0.5 * theta + ms;
  below("eps < d/(kp - theta/2 + m_sum)", eps, denom1 > 0.0 ? d / denom1 : kInf);

  const double u = d - alpha_lb * ms;
  const double root = std::sqrt(u * u + 4.0 * mh * mh * kp);
  below("eps < (d - alpha_lb m_sum)/(2 m_hi) (1 + sqrt(1 + 4 m_hi^2 kp/(d - alpha_lb m_sum)^2))",
        eps, u >= 0.0 ? (u + root) / (2.0 * mh) : (u - root) / (2.0 * mh));

  below("theta < 2(kp + m_sum)", theta, 2.0 * (kp + ms));
  below("alpha_lb < d/m_sum", alpha_lb, d / ms);

  double alpha_cap = -kInf;
  if (eps > 0.0) {
    const double a0 = (kp + eps * d - 0.5 * ms) / (2.0 * eps * ms);
    const double rad = a0 * a0 + (d - eps * denom1) / (eps * ms);
    if (rad >= 0.0) alpha_cap = a0 + std::sqrt(rad);
  }
  below("alpha_lb < alpha0 + sqrt(alpha0^2 + (d - eps(kp - theta/2 + m_sum))/(eps m_sum))",
        alpha_lb, alpha_cap);

  const KappaPhi k = ComputeKappaPhi(b, eps, theta, alpha_lb);
  above("kappa > 0", k.kappa, 0.0);
  above("phi > 0", k.phi, 0.0);
  below("eps < sqrt(kappa/m_hi)", eps,
        k.kappa > 0.0 ? std::sqrt(k.kappa / mh) : 0.0);
  return r;
}

MetricBounds ComputeMetricBounds(double kappa_lo, double kappa_hi, double m_lo,
                                 double m_hi, double eps) {
  if (!(kappa_lo > 0.0) || kappa_hi < kappa_lo || !(m_lo > 0.0) ||
      m_hi < m_lo) {
    throw InputError("ComputeMetricBounds: need 0 < kappa_lo <= kappa_hi and "
                     "0 < m_lo <= m_hi");
  }
  const double cap = std::sqrt(m_lo * kappa_lo) / m_hi;
  if (!(eps > 0.0 && eps < cap)) {
    throw InfeasibleError("metric bounds: condition 0 < eps < sqrt(m_lo "
                          "kappa_lo)/m_hi violated (eps = " +
                          FormatDouble(eps) + ", cap = " + FormatDouble(cap) +
                          ")");
  }
  const double off = 2.0 * eps * m_hi;
  MetricBounds out;
  out.mu_lo = 0.5 * (kappa_lo + m_lo -
                     std::sqrt((kappa_lo - m_lo) * (kappa_lo - m_lo) + off * off));
  out.mu_hi = 0.5 * (kappa_hi + m_hi +
                     std::sqrt((kappa_hi - m_hi) * (kappa_hi - m_hi) + off * off));
  return out;
}

double ShapedPotential(const dynamics::LagrangianModel& model,
                       const VectorXd& e) {
  return model.Potential(e) - model.Potential(VectorXd::Zero(e.size()));
}

double LyapunovV(const dynamics::LagrangianModel& model, Structure structure,
                 double kappa, double eps, const VectorXd& q, const VectorXd& e,
                 const VectorXd& de) {
  const MatrixXd m = model.MassMatrix(q);
  const double g =
      structure == Structure::kNatural ? ShapedPotential(model, e) : 0.0;
  return g + 0.5 * kappa * e.squaredNorm() + eps * e.dot(m * de) +
         0.5 * de.dot(m * de);
}

double MuFloor(double kappa, double m_lo, double eps, double potential,
               double x_sq) {
  const double base = numerics::MetricEigLower(kappa, m_lo, eps);
  return x_sq > 0.0 ? base + 2.0 * potential / x_sq : base;
}

double Radius(const CertificateParams& p, double mu_lb) {
  if (!(mu_lb > 0.0)) return kInf;
  return p.bounds.delta *
         std::sqrt((p.eps / p.theta + 1.0 / p.phi) / (2.0 * mu_lb));
}

double VFloor(const CertificateParams& p) {
  return (p.eps / p.theta + 1.0 / p.phi) * p.bounds.delta * p.bounds.delta /
         4.0;
}

FrozenSample Freeze(const dynamics::LagrangianModel& model,
                    Structure structure, const VectorXd& q, const VectorXd& dq,
                    const VectorXd& e, const VectorXd& de, const MatrixXd& kp,
                    const MatrixXd& kd, double eps_reg) {
  const int n = model.dof();
  if (q.size() != n || dq.size() != n || e.size() != n || de.size() != n ||
      kp.rows() != n || kd.rows() != n) {
    throw InputError("Freeze: size mismatch");
  }
  const dynamics::ElComponents c = model.Components(q, dq);
  FrozenSample s;
  s.structure = structure;
  s.M = c.M;
  s.C = c.C;
  s.e = e;
  s.de = de;
  s.kp = kp;
  s.kd = kd;
  s.eps_reg = eps_reg;
  if (structure == Structure::kNatural) {
    s.D = model.Damping(de);
    s.g_q = c.g;
    s.d_q = c.d;
    s.g_e = model.PotentialForce(e);
    s.potential = ShapedPotential(model, e);
  } else {
    s.D = MatrixXd::Zero(n, n);
    s.g_q = s.d_q = s.g_e = VectorXd::Zero(n);
  }
  return s;
}

MatrixXd RemainderMatrix(const FrozenSample& s, const CertificateParams& p) {
  const int n = static_cast<int>(s.e.size());
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd kt =
      0.5 * (s.kp + s.kp.transpose()) - p.bounds.kp_lo * id;
  const MatrixXd dt = 0.5 * (s.D + s.D.transpose()) -
                      p.bounds.d_hat_lo * id +
                      0.5 * (s.kd + s.kd.transpose()) - p.bounds.kd_lo * id;
  MatrixXd r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = p.eps * kt;
  r.topRightCorner(n, n) = 0.5 * (kt + p.eps * (dt - s.C.transpose()));
  r.bottomLeftCorner(n, n) = r.topRightCorner(n, n).transpose();
  r.bottomRightCorner(n, n) = dt;
  return r;
}

double StructureTerms(const FrozenSample& s, double eps) {
  if (s.structure != Structure::kNatural) return 0.0;
  const double ee = s.e.squaredNorm(), dd = s.de.squaredNorm();
  const double eg = s.e.dot(s.g_q), dg = s.de.dot(s.d_q), ed = s.e.dot(s.de);
  const double he = control::Heaviside(eg), hd = control::Heaviside(dg);
  const double nu_e = he * eg * ee / (s.eps_reg + ee);
  const double omega_e = he * ed * eg / (s.eps_reg + ee);
  const double nu_de = hd * dg * dd / (s.eps_reg + dd);
  const double omega_de = hd * ed * dg / (s.eps_reg + dd);
  return eps * (s.e.dot(s.g_e) + nu_e + omega_de) + nu_de + omega_e;
}

namespace {

struct Root {
  double alpha;
  bool real;
};

// Smaller root of a₀ − 2a₁α + a₂α² = 0.
Root SmallerRoot(double a0, double a1, double a2) {
  const double scale = std::abs(a0) + std::abs(a1) + std::abs(a2);
  if (std::abs(a2) <= 1e-14 * scale) {
    if (a1 == 0.0) return {a0 >= 0.0 ? kInf : -kInf, true};
    return {a0 / (2.0 * a1), true};
  }
  const double disc = a1 * a1 - a0 * a2;
  if (disc < 0.0) return {std::numeric_limits<double>::quiet_NaN(), false};
  const double sq = std::sqrt(disc);
  // Cancellation-free form of (a₁ − √disc)/a₂.
  if (a1 > 0.0) return {a0 / (a1 + sq), true};
  return {(a1 - sq) / a2, true};
}

}  // namespace

RateResult RateAlpha(const FrozenSample& s, const CertificateParams& p) {
  const WorstCaseBounds& b = p.bounds;
  const double x_sq = s.e.squaredNorm() + s.de.squaredNorm();
  RateResult out;
  out.zero_state = !(x_sq > 0.0);
  out.lambda_r = numerics::MinEigenvalue(numerics::SymMatrix(RemainderMatrix(s, p)));
  const double c = out.zero_state ? 0.0 : StructureTerms(s, p.eps) / x_sq;
  const double g = out.zero_state ? 0.0 : s.potential / x_sq;

  const double kp = b.kp_lo, eps = p.eps, kap = p.kappa;
  const double bb = kp + eps * b.d_lo() - kap;
  const double gamma = b.d_lo() - 0.5 * p.phi;

  const VectorXd ev = numerics::SymEigenvalues(numerics::SymMatrix(s.M));
  std::vector<double> cand(ev.data(), ev.data() + ev.size());
  cand.push_back(b.m_lo);
  cand.push_back(b.m_hi);

  out.alpha = kInf;
  out.real_root = true;
  for (double m : cand) {
    const double vk = kap + m + 4.0 * g;
    const double zeta = gamma - eps * (kp - 0.5 * p.theta + m);
    const double xi =
        eps * (kp - 0.5 * p.theta - m) + gamma + 2.0 * out.lambda_r + 2.0 * c;
    const double a0 = xi * xi - zeta * zeta - bb * bb;
    const double a1 = vk * xi + (kap - m) * zeta - 2.0 * eps * m * bb;
    const double a2 = vk * vk - (kap - m) * (kap - m) - 4.0 * eps * eps * m * m;
    const Root r = SmallerRoot(a0, a1, a2);
    if (!r.real) {
      out.real_root = false;
      continue;
    }
    if (r.alpha < out.alpha) {
      out.alpha = r.alpha;
      out.m_star = m;
      out.a0 = a0;
      out.a1 = a1;
      out.a2 = a2;
    }
  }
  if (!out.real_root) out.alpha = std::numeric_limits<double>::quiet_NaN();
  out.in_region = out.real_root && out.alpha >= p.alpha_lb;
  return out;
}

}  // namespace certificates
}  // namespace lgpctrl
