#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "lgpctrl/certificates/bounds.h"
#include "lgpctrl/certificates/certify.h"
#include "lgpctrl/certificates/theorem.h"
#include "lgpctrl/common/errors.h"
#include "lgpctrl/control/controllers.h"
#include "lgpctrl/dynamics/integrator.h"
#include "lgpctrl/dynamics/two_link.h"
#include "lgpctrl/numerics/linalg.h"
#include "oracles.h"

namespace lgpctrl {
namespace certificates {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using numerics::SymMatrix;
using oracles::OracleRate;

WorstCaseBounds Simple(double kp, double d, double m_lo, double m_hi,
                       double delta) {
  WorstCaseBounds b;
  b.kp_lo = kp;
  b.kd_lo = d;
  b.d_hat_lo = 0.0;
  b.m_lo = m_lo;
  b.m_hi = m_hi;
  b.delta = delta;
  return b;
}

MatrixXd Metric(double kappa, double eps, const MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  MatrixXd out(2 * n, 2 * n);
  out << kappa * MatrixXd::Identity(n, n), eps * m, eps * m, m;
  return out;
}

std::shared_ptr<const dynamics::TwoLink> Truth() {
  return std::make_shared<dynamics::TwoLink>(dynamics::TwoLinkParams{});
}

std::shared_ptr<const dynamics::TwoLink> Biased() {
  return std::make_shared<dynamics::TwoLink>(
      dynamics::BiasedTwoLinkParams(dynamics::TwoLinkParams{}, 0.2, -0.2));
}

control::Reference ArmReference() {
  return control::Reference::Sine(VectorXd::Constant(2, M_PI / 2), 1.0);
}

TEST(GainIntervalsTest, TwoLinkAnchor) {
  const auto g = control::GainAdaptation::Scalar(2, 100.0, 0.02, 7.11);
  const control::GainBounds b = GainIntervals(g, -1.0, 1.0);
  EXPECT_NEAR(b.k_lo, 1.0009, 1e-3);
  EXPECT_EQ(b.k_hi, 100.0);
}

TEST(KappaPhiTest, FormulaArithmetic) {
  WorstCaseBounds b = Simple(11.0, 2.0, 1.0, 2.0, 1.0);
  const KappaPhi k = ComputeKappaPhi(b, 1.0, 0.5, 0.1);
  EXPECT_NEAR(k.kappa, 12.7, 1e-12);
  EXPECT_NEAR(k.phi, 2.0 * (2.0 - (11.0 - 0.25) + 0.1 * 12.7) - 1.1 * 3.0, 1e-12);
  const KappaPhi z = ComputeKappaPhi(b, 0.0, 0.5, 0.0);
  EXPECT_EQ(z.kappa, 11.0);
  EXPECT_EQ(z.phi, 4.0);
}

TEST(KappaPhiTest, KappaGrowsWithStiffnessFloor) {
  double prev = -1e300;
  for (double kp = 1.0; kp < 50.0; kp += 1.0) {
    const double k = ComputeKappaPhi(Simple(kp, 3.0, 0.5, 2.0, 1.0), 0.3, 1.0, 0.1).kappa;
    EXPECT_GE(k, prev);
    prev = k;
  }
}

TEST(FeasibilityTest, NamedViolations) {
  const WorstCaseBounds b = Simple(11.0, 11.0, 0.2, 3.0, 0.5);
  const FeasibilityReport ok = CheckFeasibility(b, 0.2, 1.0, 0.05);
  EXPECT_TRUE(ok.ok()) << ok.ToString();

  const FeasibilityReport theta =
      CheckFeasibility(b, 0.2, 2.0 * (b.kp_lo + b.m_sum()), 0.05);
  ASSERT_FALSE(theta.ok());
  EXPECT_EQ(theta.violated().front(), "theta < 2(kp + m_sum)");

  const FeasibilityReport eps0 = CheckFeasibility(b, 0.0, 1.0, 0.05);
  ASSERT_FALSE(eps0.ok());
  EXPECT_EQ(eps0.violated().front(), "eps > 0");
}

TEST(MetricBoundsTest, Limits) {
  const MetricBounds dec = ComputeMetricBounds(3.0, 5.0, 0.5, 2.0, 1e-12);
  EXPECT_NEAR(dec.mu_lo, 0.5, 1e-9);
  EXPECT_NEAR(dec.mu_hi, 5.0, 1e-9);
  const MetricBounds same = ComputeMetricBounds(2.0, 2.0, 2.0, 2.0, 0.3);
  EXPECT_NEAR(same.mu_lo, 0.7 * 2.0, 1e-12);
  EXPECT_NEAR(same.mu_hi, 1.3 * 2.0, 1e-12);
  EXPECT_THROW(ComputeMetricBounds(2.0, 2.0, 1.0, 2.0, 1.0), InfeasibleError);
  EXPECT_THROW(ComputeMetricBounds(2.0, 2.0, 1.0, 2.0, 0.0), InfeasibleError);
}

TEST(MetricBoundsTest, EnclosesAssembledSpectrum) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const int n = 2 + k % 3;
    const double m_lo = 0.1 + u(rng), m_hi = m_lo * (1.0 + 3.0 * u(rng));
    const double k_lo = 0.5 + 5.0 * u(rng), k_hi = k_lo * (1.0 + u(rng));
    const double eps = 0.99 * u(rng) * std::sqrt(m_lo * k_lo) / m_hi;
    if (!(eps > 0.0)) continue;
    auto spd = [&](double lo, double hi) {
      const Eigen::HouseholderQR<MatrixXd> qr(MatrixXd::Random(n, n));
      const MatrixXd q = qr.householderQ();
      VectorXd ev(n);
      for (int i = 0; i < n; ++i) ev(i) = lo + (hi - lo) * u(rng);
      ev(0) = lo;
      ev(n - 1) = hi;
      return MatrixXd(q * ev.asDiagonal() * q.transpose());
    };
    const MatrixXd m = spd(m_lo, m_hi), kk = spd(k_lo, k_hi);
    MatrixXd metric(2 * n, 2 * n);
    metric << kk, eps * m, eps * m, m;
    const VectorXd ev = numerics::SymEigenvalues(SymMatrix(metric));
    const MetricBounds mb = ComputeMetricBounds(k_lo, k_hi, m_lo, m_hi, eps);
    EXPECT_GE(ev(0), mb.mu_lo - 1e-12);
    EXPECT_LE(ev(2 * n - 1), mb.mu_hi + 1e-12);
  }
}

TEST(LyapunovTest, AssembledMetricOracle) {
  const auto model = Biased();
  EXPECT_EQ(LyapunovV(*model, Structure::kNatural, 5.0, 0.4, VectorXd::Ones(2),
                      VectorXd::Zero(2), VectorXd::Zero(2)),
            0.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const VectorXd q = Eigen::Vector2d(g(rng), g(rng));
    const VectorXd e = Eigen::Vector2d(g(rng), g(rng));
    const VectorXd de = Eigen::Vector2d(g(rng), g(rng));
    VectorXd x(4);
    x << e, de;
    const double kappa = 3.0, eps = 0.4;
    const double quad =
        0.5 * x.dot(Metric(kappa, eps, model->MassMatrix(q)) * x);
    const double pot = model->Potential(e) - model->Potential(VectorXd::Zero(2));
    const double v = LyapunovV(*model, Structure::kNatural, kappa, eps, q, e, de);
    EXPECT_NEAR(v, quad + pot, 1e-9 * std::abs(quad + pot));
    EXPECT_NEAR(LyapunovV(*model, Structure::kCompensating, kappa, eps, q, e, de),
                quad, 1e-9 * quad);
    const MatrixXd m = model->MassMatrix(q);
    EXPECT_NEAR(LyapunovV(*model, Structure::kNatural, kappa, 0.0, q, e, de),
                pot + 0.5 * kappa * e.squaredNorm() + 0.5 * de.dot(m * de),
                1e-12 * (1.0 + std::abs(v)));
  }
}

TEST(MuFloorTest, Examples) {
  EXPECT_DOUBLE_EQ(MuFloor(3.0, 2.0, 0.0, 0.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(MuFloor(0.5, 2.0, 0.0, 0.0, 1.0), 0.5);
  EXPECT_NEAR(MuFloor(1.0, 1.0, 0.5, 0.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(MuFloor(1.0, 1.0, 0.5, 0.3, 2.0), 0.8, 1e-15);
  EXPECT_NEAR(MuFloor(1.0, 1.0, 0.5, 0.3, 0.0), 0.5, 1e-15);
}

TEST(RadiusTest, Examples) {
  CertificateParams p;
  p.eps = 1.0;
  p.theta = 1.0;
  p.phi = 1.0;
  p.bounds.delta = 1.0;
  EXPECT_NEAR(Radius(p, 1.0), 1.0, 1e-15);
  EXPECT_TRUE(std::isinf(Radius(p, 0.0)));
  double prev = -1.0;
  for (double delta : {0.0, 0.1, 0.5, 2.0}) {
    p.bounds.delta = delta;
    EXPECT_GE(Radius(p, 0.7), prev);
    prev = Radius(p, 0.7);
  }
  p.bounds.delta = 0.0;
  EXPECT_EQ(Radius(p, 0.3), 0.0);
  EXPECT_EQ(VFloor(p), 0.0);
}

// Bounds of the biased arm around the benchmark task.
WorstCaseBounds ArmBounds(double delta) {
  return SampleBounds(*Biased(), ArmReference(), Structure::kNatural,
                      {11.0, 11.0}, delta);
}

TEST(SampleBoundsTest, EnclosesAndFitsCoriolis) {
  const WorstCaseBounds b = ArmBounds(0.5);
  EXPECT_NO_THROW(b.Validate());
  EXPECT_LT(b.m_lo, b.m_hi);
  EXPECT_GE(b.d_hat_lo, 0.8 - 1e-12);  // damping floor of the biased arm
  EXPECT_EQ(b.kp_lo, 11.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto model = Biased();
  const control::Reference ref = ArmReference();
  int outside = 0;
  for (int k = 0; k < 500; ++k) {
    const double t = 5.0 * (u(rng) + 1.0);
    const VectorXd q = ref.q(t) + 0.5 * Eigen::Vector2d(u(rng), u(rng));
    const VectorXd dq = ref.dq(t) + Eigen::Vector2d(u(rng), u(rng));
    const double ratio = model->Components(q, dq).C.operatorNorm() / dq.norm();
    if (ratio > (b.c0 + b.c1 * q.norm()) * (1 + 1e-9)) ++outside;
  }
  EXPECT_EQ(outside, 0);
  const WorstCaseBounds pdp = SampleBounds(*Biased(), ArmReference(),
                                           Structure::kCompensating, {11, 11}, 0.5);
  EXPECT_EQ(pdp.d_hat_lo, 0.0);
}

CertificateParams ArmParams(double delta) {
  const OptimizeResult opt = OptimizeCertParams(ArmBounds(delta));
  EXPECT_TRUE(opt.feasible);
  return opt.params;
}

TEST(RateAlphaTest, QuadraticResidualAndOracle) {
  const auto model = Biased();
  const CertificateParams p = ArmParams(0.5);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 1.0);
  int above_floor = 0;
  for (int k = 0; k < 20; ++k) {
    const VectorXd q = Eigen::Vector2d(g(rng), g(rng));
    const VectorXd dq = Eigen::Vector2d(g(rng), g(rng));
    const VectorXd e = 0.5 * Eigen::Vector2d(g(rng), g(rng));
    const VectorXd de = 0.5 * Eigen::Vector2d(g(rng), g(rng));
    const MatrixXd kp = (11.0 + std::abs(g(rng))) * MatrixXd::Identity(2, 2);
    for (Structure st : {Structure::kNatural, Structure::kCompensating}) {
      const FrozenSample s = Freeze(*model, st, q, dq, e, de, kp, kp, 1e-3);
      const RateResult r = RateAlpha(s, p);
      ASSERT_TRUE(r.real_root);
      const double res = r.a0 - 2 * r.a1 * r.alpha + r.a2 * r.alpha * r.alpha;
      const double scale = std::abs(r.a0) + 2 * std::abs(r.a1 * r.alpha) +
                           std::abs(r.a2) * r.alpha * r.alpha;
      EXPECT_LE(std::abs(res), 1e-9 * scale);
      EXPECT_LE(r.alpha, OracleRate(s, p) + 1e-6);
      if (r.in_region) ++above_floor;
    }
  }
  EXPECT_GT(above_floor, 0);
}

TEST(RateAlphaTest, AlignedStructureRaisesRate) {
  const CertificateParams p = ArmParams(0.5);
  FrozenSample s = Freeze(*Biased(), Structure::kNatural,
                          Eigen::Vector2d(0.3, 0.1), Eigen::Vector2d(0.2, 0.4),
                          Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.2, 0.2),
                          11 * MatrixXd::Identity(2, 2),
                          11 * MatrixXd::Identity(2, 2), 1e-3);
  s.g_q = s.e;
  s.d_q = s.de;
  const double aligned = RateAlpha(s, p).alpha;
  s.g_q.setZero();
  s.d_q.setZero();
  const double plain = RateAlpha(s, p).alpha;
  EXPECT_GT(aligned, plain);
}

TEST(RateAlphaTest, ZeroStateUsesFloor) {
  const CertificateParams p = ArmParams(0.5);
  const FrozenSample s =
      Freeze(*Biased(), Structure::kNatural, Eigen::Vector2d(0.3, 0.1),
             Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
             Eigen::Vector2d::Zero(), 11 * MatrixXd::Identity(2, 2),
             11 * MatrixXd::Identity(2, 2), 1e-3);
  const RateResult r = RateAlpha(s, p);
  EXPECT_TRUE(r.zero_state);
  EXPECT_TRUE(std::isfinite(r.alpha));
}

TEST(OptimizeTest, FeasibleAndConsistent) {
  const WorstCaseBounds b = ArmBounds(0.5);
  const OptimizeResult r = OptimizeCertParams(b);
  ASSERT_TRUE(r.feasible);
  EXPECT_TRUE(CheckFeasibility(b, r.params.eps, r.params.theta, r.params.alpha_lb).ok());
  EXPECT_GE(UpsilonFloor(r.params), 6.0);
  EXPECT_NEAR(r.objective, r.rho_worst + 1.0 / r.params.alpha_lb, 1e-12);
  const double floor = MetricFloor(r.params);
  ASSERT_GT(floor, 0.0);
  EXPECT_LT(r.params.eps, std::sqrt(r.params.kappa / b.m_hi));
  // The floor lies below the κI metric spectrum for diagonal inertias
  // across the sampled range.
  for (int k = 0; k <= 20; ++k) {
    const double m = b.m_lo + (b.m_hi - b.m_lo) * k / 20.0;
    Eigen::Matrix2d metric;
    metric << r.params.kappa, r.params.eps * m, r.params.eps * m, m;
    EXPECT_GE(metric.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff(),
              floor - 1e-12);
  }
}

TEST(OptimizeTest, PerfectModelPushesRateToCap) {
  const WorstCaseBounds b = ArmBounds(0.0);
  const OptimizeResult r = OptimizeCertParams(b);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.rho_worst, 0.0);
  // No feasible ε, ϑ admit a noticeably larger α̲.
  OptimizeOptions o;
  const double a = r.params.alpha_lb * 1.05;
  o.alpha_range[0] = a;
  o.alpha_range[1] = a * 1.0001;
  o.refine_rounds = 0;
  o.grid = 40;
  EXPECT_FALSE(OptimizeCertParams(b, o).feasible);
}

TEST(OptimizeTest, ReportsBindingConstraints) {
  OptimizeOptions o;
  o.upsilon_lb = 1e6;
  const OptimizeResult r = OptimizeCertParams(ArmBounds(0.5), o);
  EXPECT_FALSE(r.feasible);
  ASSERT_FALSE(r.binding.empty());
}

TEST(CertifyTest, ZeroInitialErrorStaysInEnvelope) {
  const auto truth = Truth();
  control::ControllerSpec spec;
  spec.kind = control::ControllerKind::kNatPdp;
  spec.model = truth;
  spec.kp = spec.kd = 11 * MatrixXd::Identity(2, 2);
  control::TrackingController ctl(spec, ArmReference());
  const auto traj = dynamics::Integrate(
      *truth, &ctl, {ArmReference().q(0), ArmReference().dq(0)}, 1.0, 1e-3);
  // The held torque leaves a small residual, covered by a small Δ.
  const WorstCaseBounds b = SampleBounds(*truth, ArmReference(),
                                         Structure::kNatural, {11, 11}, 0.05);
  const CertificateParams p = OptimizeCertParams(b).params;
  const CertificateTrace tr =
      Certify(traj, *truth, Structure::kNatural, p, ctl.log(), 1e-3);
  EXPECT_EQ(tr.violations(), 0);
  EXPECT_LT(*std::max_element(tr.err_norm.begin(), tr.err_norm.end()), 1e-2);
  EXPECT_EQ(tr.size(), traj.size());
  const CsvTable csv = tr.ToCsv();
  EXPECT_EQ(csv.header.size(), 7u);
  EXPECT_EQ(csv.column("violated"), 6);
}

TEST(CertifyTest, LooseDeltaCoversConvergingRun) {
  const auto truth = Truth();
  const auto model = Biased();
  control::ControllerSpec spec;
  spec.kind = control::ControllerKind::kNatPdp;
  spec.model = model;
  spec.kp = spec.kd = 11 * MatrixXd::Identity(2, 2);
  control::TrackingController ctl(spec, ArmReference());
  const auto traj = dynamics::Integrate(
      *truth, &ctl, {Eigen::Vector2d(0.5, -0.4), Eigen::Vector2d(1.0, 2.0)}, 5.0,
      1e-3);
  ASSERT_FALSE(traj.diverged);
  const WorstCaseBounds b = SampleBounds(*model, ArmReference(),
                                         Structure::kNatural, {11, 11}, 50.0);
  const CertificateParams p = OptimizeCertParams(b).params;
  const CertificateTrace tr =
      Certify(traj, *model, Structure::kNatural, p, ctl.log(), 1e-3);
  EXPECT_EQ(tr.violations(), 0);
  // μ̲(t) lower-bounds the Rayleigh quotient 2V/‖x‖² of the full metric.
  for (int k = 0; k < tr.size(); k += 50) {
    const double x_sq = tr.err_norm[k] * tr.err_norm[k];
    if (x_sq > 1e-12) {
      EXPECT_LE(tr.mu_lb[k], 2.0 * tr.V[k] / x_sq * (1 + 1e-12));
    }
  }
}

TEST(CertifyTest, NoClaimOutsideRegion) {
  const auto truth = Truth();
  control::ControllerSpec spec;
  spec.kind = control::ControllerKind::kNatPdp;
  spec.model = truth;
  spec.kp = spec.kd = 11 * MatrixXd::Identity(2, 2);
  control::TrackingController ctl(spec, ArmReference());
  const auto traj = dynamics::Integrate(
      *truth, &ctl, {Eigen::Vector2d(0.3, 0.1), Eigen::Vector2d(0.0, 0.0)}, 1.0,
      1e-3);
  const WorstCaseBounds b = SampleBounds(*truth, ArmReference(),
                                         Structure::kNatural, {11, 11}, 0.05);
  CertificateParams p = OptimizeCertParams(b).params;
  // A rate floor above every attainable rate leaves nothing certified.
  p.alpha_lb = 1e6;
  const CertificateTrace tr =
      Certify(traj, *truth, Structure::kNatural, p, ctl.log(), 1e-3);
  EXPECT_EQ(tr.region_misses(), tr.size());
  EXPECT_EQ(tr.violations(), 0);
  for (int k = 0; k < tr.size(); ++k) {
    EXPECT_TRUE(std::isinf(tr.envelope[k]));
  }
}

TEST(CertifyTest, RejectsMismatchedLog) {
  const auto truth = Truth();
  dynamics::FunctionController zero([](double, const dynamics::JointState& s) {
    return VectorXd::Zero(s.q.size()).eval();
  });
  const auto traj = dynamics::Integrate(*truth, &zero, {VectorXd::Zero(2), VectorXd::Zero(2)},
                                        0.01, 1e-3);
  const CertificateParams p = MakeParams(Simple(1, 1, 1, 1, 1), 0.1, 1, 0.1);
  EXPECT_THROW(Certify(traj, *truth, Structure::kNatural, p, {}, 1e-3), InputError);
}

}  // namespace
}  // namespace certificates
}  // namespace lgpctrl
