#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/control/controllers.h"
#include "lgpctrl/control/gain_adaptation.h"
#include "lgpctrl/control/primitives.h"
#include "lgpctrl/control/reference.h"
#include "lgpctrl/dynamics/fem_rod.h"
#include "lgpctrl/dynamics/integrator.h"
#include "lgpctrl/dynamics/two_link.h"
#include "lgpctrl/lgp/model.h"

namespace lgpctrl {
namespace control {
namespace {

using dynamics::JointState;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using numerics::SymMatrix;

MatrixXd RandomSpd(std::mt19937_64* rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const Eigen::HouseholderQR<MatrixXd> qr(MatrixXd::Random(n, n));
  const MatrixXd q = qr.householderQ();
  VectorXd ev(n);
  for (int i = 0; i < n; ++i) ev(i) = u(*rng);
  return q * ev.asDiagonal() * q.transpose();
}

MatrixXd RandomPsd(std::mt19937_64* rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd a(n, n - 1);  // rank-deficient on purpose
  for (int i = 0; i < a.size(); ++i) a(i) = g(*rng);
  return scale * a * a.transpose();
}

TEST(PrimitivesTest, Heaviside) {
  EXPECT_EQ(Heaviside(1.0), 1.0);
  EXPECT_EQ(Heaviside(-2.0), 0.0);
  EXPECT_EQ(Heaviside(0.0), 0.5);
}

TEST(PrimitivesTest, ProjectorCases) {
  const SymMatrix p = Projector(Eigen::Vector2d(1, 0), 0.0);
  EXPECT_EQ(p.matrix(), (Eigen::Matrix2d() << 1, 0, 0, 0).finished());
  EXPECT_EQ(Projector(Eigen::Vector2d::Zero(), 1e-3).matrix(),
            Eigen::Matrix2d::Zero());
  const MatrixXd h = Projector(Eigen::Vector2d(1, 1), 0.0).matrix();
  EXPECT_LT((h - MatrixXd::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((h * h - h).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(Projector(Eigen::Vector2d::Zero(), 0.0), InputError);
  EXPECT_THROW(Projector(Eigen::Vector2d(1, 0), -1.0), InputError);
}

TEST(PrimitivesTest, ProjectorContracts) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    VectorXd e(4), v(4);
    for (int i = 0; i < 4; ++i) {
      e(i) = g(rng) * (k % 3 == 0 ? 1e-3 : 1.0);
      v(i) = g(rng);
    }
    const double eps = k % 2 ? 1e-3 : 0.0;
    EXPECT_LE((Projector(e, eps).matrix() * v).norm(), v.norm() * (1 + 1e-14));
  }
}

TEST(GainAdaptationTest, ScalarAnchors) {
  const GainAdaptation arm = GainAdaptation::Scalar(1, 100.0, 0.02, 7.11);
  const double k_arm = arm.Gain(SymMatrix::Zero(1))(0, 0);
  EXPECT_NEAR(k_arm, 1.0009, 1e-3);
  EXPECT_NEAR(k_arm, arm.LowerBound(), 1e-12);
  const GainAdaptation rod = GainAdaptation::Scalar(1, 10.0, 1e-3, 10.05);
  EXPECT_NEAR(rod.Gain(SymMatrix::Zero(1))(0, 0), 0.1, 1e-3);
  const double big = arm.Gain(SymMatrix(MatrixXd::Constant(1, 1, 1e9)))(0, 0);
  EXPECT_NEAR(big, 100.0, 1e-3 * 100.0);
}

TEST(GainAdaptationTest, MatchesInversionLemmaForm) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 4;
    const MatrixXd k1 = RandomSpd(&rng, n, 0.5, 50.0);
    const MatrixXd k2 = RandomSpd(&rng, n, 0.01, 2.0);
    const MatrixXd k3 = RandomSpd(&rng, n, 0.5, 10.0);
    const MatrixXd sigma = n > 1 ? RandomPsd(&rng, n, 0.3) : MatrixXd::Zero(1, 1);
    const GainAdaptation g{SymMatrix(k1), SymMatrix(k2), SymMatrix(k3)};
    const MatrixXd want =
        (k1.inverse() + k3.inverse() * (k2 + sigma).inverse() * k3.inverse())
            .inverse();
    EXPECT_LT((g.Gain(SymMatrix(sigma)).matrix() - want).norm(),
              1e-9 * want.norm());
  }
}

TEST(GainAdaptationTest, SpectrumInsideLemmaInterval) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 1000; ++k) {
    const int n = 2 + k % 3;
    const GainAdaptation g{SymMatrix(RandomSpd(&rng, n, 0.5, 50.0)),
                           SymMatrix(RandomSpd(&rng, n, 0.01, 2.0)),
                           SymMatrix(RandomSpd(&rng, n, 0.5, 10.0))};
    const VectorXd ev = numerics::SymEigenvalues(
        g.Gain(SymMatrix(RandomPsd(&rng, n, std::pow(10.0, k % 7 - 3)))));
    EXPECT_GT(ev(0), g.LowerBound());
    EXPECT_LT(ev(n - 1), g.UpperBound());
  }
}

TEST(GainAdaptationTest, LargeK3ApproachesK1Floor) {
  const GainAdaptation g = GainAdaptation::Scalar(2, 10.0, 0.5, 1e6);
  EXPECT_NEAR(g.LowerBound(), 10.0, 1e-9);
  const GainBounds b = g.Bounds(-1.0, 2.0);
  EXPECT_EQ(b.k_hi, 10.0);
  EXPECT_LT(b.dk_lo, 0.0);
  EXPECT_GT(b.dk_hi, 0.0);
  EXPECT_THROW(g.Bounds(0.5, 1.0), InputError);
}

TEST(GainAdaptationTest, RateWithinDerivativeBounds) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3;
    const GainAdaptation g{SymMatrix(RandomSpd(&rng, n, 0.5, 20.0)),
                           SymMatrix(RandomSpd(&rng, n, 0.05, 1.0)),
                           SymMatrix(RandomSpd(&rng, n, 0.5, 5.0))};
    const MatrixXd a = RandomSpd(&rng, n, 1.0, 2.0);
    const MatrixXd b = RandomSpd(&rng, n, 0.1, 0.9);
    const MatrixXd c = RandomPsd(&rng, n, 0.2);
    auto sigma = [&](double t) {
      return SymMatrix(a + std::sin(1.7 * t) * b + t * t * c);
    };
    auto sigma_dot = [&](double t) {
      return SymMatrix(1.7 * std::cos(1.7 * t) * b + 2 * t * c);
    };
    double sd_lo = 0.0, sd_hi = 0.0;
    for (double t = 0.0; t <= 2.0; t += 0.05) {
      const VectorXd ev = numerics::SymEigenvalues(sigma_dot(t));
      sd_lo = std::min(sd_lo, ev(0));
      sd_hi = std::max(sd_hi, ev(n - 1));
    }
    const GainBounds bounds = g.Bounds(sd_lo, sd_hi);
    constexpr double kH = 1e-5;
    for (double t = 0.0; t <= 2.0; t += 0.05) {
      const MatrixXd fd =
          (g.Gain(sigma(t + kH)).matrix() - g.Gain(sigma(t - kH)).matrix()) /
          (2 * kH);
      const MatrixXd rate = g.GainRate(sigma(t), sigma_dot(t)).matrix();
      EXPECT_LT((fd - rate).norm(), 1e-6 * (1.0 + rate.norm()));
      const VectorXd ev = numerics::SymEigenvalues(SymMatrix(fd));
      EXPECT_GE(ev(0), bounds.dk_lo - 1e-6);
      EXPECT_LE(ev(n - 1), bounds.dk_hi + 1e-6);
    }
  }
}

TEST(GainAdaptationTest, RejectsIndefiniteFactors) {
  const SymMatrix id = SymMatrix::Identity(2);
  const SymMatrix bad(Eigen::Matrix2d(Eigen::Vector2d(1, -1).asDiagonal()));
  EXPECT_THROW(GainAdaptation(bad, id, id), InputError);
  EXPECT_THROW(GainAdaptation(id, id, SymMatrix::Identity(3)), InputError);
}

TEST(ReferenceTest, SineDerivatives) {
  const Reference r = Reference::Sine(Eigen::Vector2d(1.0, 2.0), 3.0);
  EXPECT_EQ(r.dof(), 2);
  EXPECT_NEAR(r.q(0.5)(1), 2.0 * std::sin(1.5), 1e-15);
  EXPECT_NEAR(r.dq(0.5)(0), 3.0 * std::cos(1.5), 1e-15);
  EXPECT_NEAR(r.ddq(0.5)(0), -9.0 * std::sin(1.5), 1e-15);
  auto q = [](double t) -> VectorXd { return VectorXd::Constant(1, t * t); };
  auto wrong = [](double t) -> VectorXd { return VectorXd::Constant(1, t); };
  auto two = [](double) -> VectorXd { return VectorXd::Constant(1, 2.0); };
  EXPECT_NO_THROW(Reference(q, [](double t) -> VectorXd {
    return VectorXd::Constant(1, 2 * t);
  }, two));
  EXPECT_THROW(Reference(q, wrong, two), InputError);
}

std::shared_ptr<const dynamics::TwoLink> Arm() {
  return std::make_shared<dynamics::TwoLink>(dynamics::TwoLinkParams{});
}

ControllerSpec Spec(ControllerKind kind,
                    std::shared_ptr<const dynamics::LagrangianModel> model) {
  ControllerSpec s;
  s.kind = kind;
  s.model = std::move(model);
  s.kp = 10.0 * MatrixXd::Identity(2, 2);
  s.kd = 10.0 * MatrixXd::Identity(2, 2);
  return s;
}

Reference ArmReference() { return Reference::Sine(VectorXd::Constant(2, M_PI / 2), 1.0); }

TEST(ControllerTest, ExactModelTracksFromZeroError) {
  for (ControllerKind kind : {ControllerKind::kPdp, ControllerKind::kNatPdp}) {
    TrackingController ctl(Spec(kind, Arm()), ArmReference());
    const JointState x0{ArmReference().q(0.0), ArmReference().dq(0.0)};
    // The torque is held over each sample, so the residual error is O(dt).
    const dynamics::Trajectory traj =
        dynamics::Integrate(*Arm(), &ctl, x0, 1.0, 1e-6);
    ASSERT_FALSE(traj.diverged);
    double worst = 0.0;
    for (const auto& e : traj.e) worst = std::max(worst, e.norm());
    EXPECT_LT(worst, 1e-6) << ToString(kind);
  }
}

TEST(ControllerTest, PdpGravityHold) {
  const auto arm = Arm();
  const Reference still = Reference::Sine(VectorXd::Zero(2), 1.0);
  const JointState s{VectorXd::Zero(2), Eigen::Vector2d(0.3, -0.2)};
  const MatrixXd kp = 10.0 * MatrixXd::Identity(2, 2);
  const MatrixXd kd = 7.0 * MatrixXd::Identity(2, 2);
  const VectorXd tau = PdpTorque(*arm, still, 0.0, s, kp, kd);
  const VectorXd want = arm->PotentialForce(s.q) + arm->Damping(s.dq) * s.dq -
                        kd * s.dq;
  EXPECT_LT((tau - want).norm(), 1e-12);
}

TEST(ControllerTest, NatPdpIsFeedforwardAtZeroError) {
  const auto arm = Arm();
  const Reference ref = ArmReference();
  const double t = 0.8;
  const JointState s{ref.q(t), ref.dq(t)};
  const dynamics::ElComponents c = arm->Components(s.q, s.dq);
  const VectorXd ff = c.M * ref.ddq(t) + c.C * ref.dq(t) + c.g + c.d;
  const VectorXd tau = NatPdpTorque(*arm, ref, t, s, 10 * MatrixXd::Identity(2, 2),
                                    10 * MatrixXd::Identity(2, 2), 1e-3);
  EXPECT_LT((tau - ff).norm(), 1e-12);
}

TEST(ControllerTest, NatPdpPreservesImpedanceWhenGatesAreOff) {
  const auto arm = Arm();
  const Reference ref = ArmReference();
  const double t = 0.4;
  // Pick errors against ĝ(q) and d̂(q̇).
  const Eigen::Vector2d q(0.7, -0.3), dq(0.5, 0.8);
  const dynamics::ElComponents c = arm->Components(q, dq);
  const JointState s{q, dq};
  const VectorXd e = q - ref.q(t);
  const VectorXd de = dq - ref.dq(t);
  ASSERT_LT(e.dot(c.g), 0.0);
  ASSERT_LT(de.dot(c.d), 0.0);
  const MatrixXd kp = 10 * MatrixXd::Identity(2, 2);
  const MatrixXd kd = 5 * MatrixXd::Identity(2, 2);
  const VectorXd want = c.M * ref.ddq(t) + c.C * ref.dq(t) + c.g -
                        arm->PotentialForce(e) - kp * e + c.d -
                        arm->Damping(de) * de - kd * de;
  EXPECT_LT((NatPdpTorque(*arm, ref, t, s, kp, kd, 1e-3) - want).norm(), 1e-12);
}

// Finds a sign change of f on [0, 2π) by a grid scan and bisects it.
template <typename F>
double SignChange(const F& f) {
  double lo = 0.0;
  for (int i = 1; i <= 64; ++i) {
    const double hi = 2 * M_PI * i / 64;
    if (f(lo) * f(hi) < 0.0) {
      double a = lo, b = hi;
      for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (a + b);
        (f(mid) * f(a) > 0 ? a : b) = mid;
      }
      return 0.5 * (a + b);
    }
    lo = hi;
  }
  ADD_FAILURE() << "no sign change";
  return 0.0;
}

TEST(ControllerTest, TorqueContinuousAcrossSwitchingSurface) {
  const auto arm = Arm();
  const Eigen::Vector2d c(0.6, 0.4), v(0.8, -0.5);
  const Reference ramp(
      [&](double t) -> VectorXd { return c + t * v; },
      [&](double) -> VectorXd { return v; },
      [](double) -> VectorXd { return VectorXd::Zero(2); });
  const MatrixXd k = 10 * MatrixXd::Identity(2, 2);
  auto circle = [](double s) { return Eigen::Vector2d(std::cos(s), std::sin(s)); };

  // Position error on a circle around q_d; eᵀĝ(q) changes sign on it.
  const double r = 0.3;
  auto pos = [&](double s) {
    return JointState{c + r * circle(s), v};
  };
  const double s_g = SignChange([&](double s) {
    return circle(s).dot(arm->PotentialForce(pos(s).q));
  });
  const double jump_g = (NatPdpTorque(*arm, ramp, 0.0, pos(s_g - 1e-9), k, k, 1e-3) -
                         NatPdpTorque(*arm, ramp, 0.0, pos(s_g + 1e-9), k, k, 1e-3))
                            .norm();
  EXPECT_LT(jump_g, 1e-6);

  // Velocity error on a circle around q̇_d; ėᵀD̂(q̇)q̇ changes sign on it.
  auto vel = [&](double s) {
    return JointState{c, v + r * circle(s)};
  };
  const double s_d = SignChange([&](double s) {
    const VectorXd dq = vel(s).dq;
    return circle(s).dot(arm->Damping(dq) * dq);
  });
  const double jump_d = (NatPdpTorque(*arm, ramp, 0.0, vel(s_d - 1e-9), k, k, 1e-3) -
                         NatPdpTorque(*arm, ramp, 0.0, vel(s_d + 1e-9), k, k, 1e-3))
                            .norm();
  EXPECT_LT(jump_d, 1e-6);
}

std::shared_ptr<const lgp::LgpModel> SmallLgp() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const dynamics::TwoLink plant(dynamics::TwoLinkParams{});
  lgp::TrainingSet ts;
  const int d = 12;
  ts.q.resize(d, 2);
  ts.dq.resize(d, 2);
  ts.ddq.resize(d, 2);
  ts.y.resize(d, 2);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < 2; ++j) {
      ts.q(i, j) = u(rng);
      ts.dq(i, j) = u(rng);
      ts.ddq(i, j) = u(rng);
    }
    const VectorXd q = ts.q.row(i).transpose(), dq = ts.dq.row(i).transpose();
    ts.y.row(i) = dynamics::InverseDynamics(plant.Components(q, dq), dq,
                                            ts.ddq.row(i).transpose())
                      .transpose();
  }
  ts.torque_noise_std = 0.1;
  ts.accel_noise_std = M_PI / 180;
  lgp::Hyperparams h = lgp::Hyperparams::Default(2);
  h.grav_amp = 5.0;
  h.kin_length = 2.0;
  auto prior = std::make_shared<dynamics::TwoLink>(
      dynamics::BiasedTwoLinkParams(dynamics::TwoLinkParams{}, 0.5, -0.5));
  return std::make_shared<lgp::LgpModel>(ts, h, prior);
}

TEST(ControllerTest, VarNatReducesToNatAsK3Vanishes) {
  const auto model = SmallLgp();
  ControllerSpec var = Spec(ControllerKind::kVarNatPdp, model);
  var.adaptation = GainAdaptation::Scalar(2, 100.0, 0.02, 1e-9);
  TrackingController var_ctl(var, ArmReference());
  TrackingController nat_ctl(Spec(ControllerKind::kNatPdp, model),
                             ArmReference());
  const JointState x0{Eigen::Vector2d(0.3, 0.2), Eigen::Vector2d::Zero()};
  const auto a = dynamics::Integrate(*Arm(), &var_ctl, x0, 0.5, 1e-3);
  const auto b = dynamics::Integrate(*Arm(), &nat_ctl, x0, 0.5, 1e-3);
  ASSERT_EQ(a.size(), b.size());
  for (int k = 0; k < a.size(); ++k) {
    EXPECT_LT((a.tau[k] - b.tau[k]).norm(), 1e-10);
  }
}

TEST(ControllerTest, VarNatLogsCovarianceAndGains) {
  const auto model = SmallLgp();
  ControllerSpec var = Spec(ControllerKind::kVarNatPdp, model);
  var.adaptation = GainAdaptation::Scalar(2, 100.0, 0.02, 7.11);
  TrackingController ctl(var, ArmReference());
  const JointState x0{Eigen::Vector2d(0.785, 0.785), Eigen::Vector2d::Zero()};
  const double dt = 1e-3;
  const auto traj = dynamics::Integrate(*Arm(), &ctl, x0, 0.3, dt);
  ASSERT_FALSE(traj.diverged);
  const auto& log = ctl.log();
  ASSERT_EQ(static_cast<int>(log.size()), traj.size());
  const double floor = 10.0 + var.adaptation->LowerBound();
  for (int k = 0; k < traj.size(); ++k) {
    EXPECT_TRUE(std::isfinite(traj.sigma_min[k]));
    EXPECT_LE(traj.sigma_min[k], traj.sigma_max[k]);
    EXPECT_GE(numerics::MinEigenvalue(SymMatrix(log[k].kp)), floor - 1e-12);
    EXPECT_EQ(log[k].kp, log[k].kd);
    if (k > 0) {
      const MatrixXd bd = (log[k].sigma - log[k - 1].sigma) / dt;
      EXPECT_LT((log[k].sigma_dot - bd).norm(), 1e-9 * (1.0 + bd.norm()));
    }
  }
  // A fresh run after Reset reproduces the first one.
  const auto again = dynamics::Integrate(*Arm(), &ctl, x0, 0.3, dt);
  EXPECT_EQ(again.tau.back(), traj.tau.back());
}

TEST(ControllerTest, SpecValidation) {
  ControllerSpec s = Spec(ControllerKind::kVarNatPdp, Arm());
  EXPECT_THROW(s.Validate(), InputError);  // no adaptation
  s.adaptation = GainAdaptation::Scalar(2, 100.0, 0.02, 7.11);
  EXPECT_THROW(s.Validate(), InputError);  // parametric model
  s = Spec(ControllerKind::kPdp, Arm());
  s.kp(0, 0) = -1.0;
  EXPECT_THROW(s.Validate(), InputError);
  s = Spec(ControllerKind::kNatPdp, Arm());
  s.eps_reg = 0.0;
  EXPECT_THROW(s.Validate(), InputError);
  EXPECT_EQ(ParseControllerKind("var-nat-pdp"), ControllerKind::kVarNatPdp);
  EXPECT_EQ(ToString(ControllerKind::kNatPdp), "nat_pdp");
  EXPECT_THROW(ParseControllerKind("pid"), InputError);
}

TEST(CcAdapterTest, RecordsInCurvatureCoordinates) {
  const dynamics::FemRodParams rod =
      dynamics::RescaledFemRodParams(dynamics::FemRodParams{}, 8);
  const auto plant = dynamics::MakeFemRod(rod);
  const dynamics::CcMap map(2, 8);
  std::shared_ptr<const dynamics::LagrangianModel> cc =
      dynamics::MakeCcChain(dynamics::BiasedCcChainParams(rod, 2, 4, 0.0));
  ControllerSpec s;
  s.kind = ControllerKind::kNatPdp;
  s.model = cc;
  s.kp = MatrixXd::Identity(2, 2);
  s.kd = MatrixXd::Identity(2, 2);
  TrackingController inner(s, Reference::Sine(Eigen::Vector2d(0.1, 0.3), 1.0));
  CcAdapter adapter(map, &inner);
  const JointState x0{map.Embed(Eigen::Vector2d(-0.1, -0.3)), VectorXd::Zero(8)};
  dynamics::IntegrateOptions opts;
  opts.substeps = 10;
  const auto traj = dynamics::Integrate(*plant, &adapter, x0, 0.2, 1e-4, opts);
  ASSERT_FALSE(traj.diverged) << traj.divergence_time;
  EXPECT_EQ(traj.q[0].size(), 2);
  EXPECT_EQ(traj.tau[0].size(), 2);
  EXPECT_LT((traj.q[0] - Eigen::Vector2d(-0.1, -0.3)).norm(), 1e-12);
  const VectorXd fem_tau = map.Actuate(traj.tau[0]);
  EXPECT_LT((map.matrix().transpose() * fem_tau - traj.tau[0]).norm(), 1e-12);
}

}  // namespace
}  // namespace control
}  // namespace lgpctrl
