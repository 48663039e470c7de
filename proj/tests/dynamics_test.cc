#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/dynamics/el_components.h"
#include "lgpctrl/dynamics/fem_rod.h"
#include "lgpctrl/dynamics/integrator.h"
#include "lgpctrl/dynamics/planar_chain.h"
#include "lgpctrl/dynamics/two_link.h"

namespace lgpctrl {
namespace dynamics {
namespace {

Eigen::VectorXd RandomVector(int n, double scale, std::mt19937_64* rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(*rng);
  return v;
}

// Fourth-order central difference of M along q + s·v at s = 0.
Eigen::MatrixXd MassRate(const LagrangianModel& m, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& v) {
  const double h = 1e-3;
  return (-m.MassMatrix(q + 2 * h * v) + 8 * m.MassMatrix(q + h * v) -
          8 * m.MassMatrix(q - h * v) + m.MassMatrix(q - 2 * h * v)) /
         (12 * h);
}

class FreeBody final : public LagrangianModel {
 public:
  explicit FreeBody(int n) : n_(n) {}
  int dof() const override { return n_; }
  ElComponents Components(const Eigen::VectorXd& q,
                          const Eigen::VectorXd& dq) const override {
    ElComponents c;
    c.M = Eigen::MatrixXd::Identity(n_, n_);
    c.C = Eigen::MatrixXd::Zero(n_, n_);
    c.g = c.d = Eigen::VectorXd::Zero(n_);
    c.D = c.C;
    return c;
  }
  Eigen::MatrixXd MassMatrix(const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Identity(n_, n_);
  }
  Eigen::VectorXd PotentialForce(const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Zero(n_);
  }
  Eigen::MatrixXd Damping(const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Zero(n_, n_);
  }
  double Potential(const Eigen::VectorXd&) const override { return 0.0; }

 private:
  int n_;
};

FunctionController ZeroTorque(int n) {
  return FunctionController(
      [n](double, const JointState&) { return Eigen::VectorXd::Zero(n); });
}

GTEST_TEST(TwoLinkTest, OriginIsEquilibrium) {
  const TwoLink arm{TwoLinkParams{}};
  const ElComponents c = arm.Components(Eigen::Vector2d::Zero(),
                                        Eigen::Vector2d::Zero());
  EXPECT_EQ(c.g, Eigen::VectorXd(Eigen::Vector2d::Zero()));
}

GTEST_TEST(TwoLinkTest, RestHasNoCoriolisOrDamping) {
  const TwoLink arm{TwoLinkParams{}};
  const ElComponents c =
      arm.Components(Eigen::Vector2d(0.3, -1.2), Eigen::Vector2d::Zero());
  EXPECT_EQ(c.C.norm(), 0.0);
  EXPECT_EQ(c.d.norm(), 0.0);
}

GTEST_TEST(TwoLinkTest, SkewSymmetry) {
  const TwoLink arm{TwoLinkParams{}};
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd q = RandomVector(2, 3.0, &rng);
    const Eigen::VectorXd dq = RandomVector(2, 2.0, &rng);
    const ElComponents c = arm.Components(q, dq);
    const Eigen::MatrixXd mdot = MassRate(arm, q, dq);
    EXPECT_LT(std::abs(dq.dot((mdot - 2 * c.C) * dq)), 1e-10);
  }
}

GTEST_TEST(TwoLinkTest, MatchesGeneralChain) {
  const TwoLinkParams p{1.3, 0.7, 0.9, 1.1, 9.0, 0.4, 0.6};
  const TwoLink arm(p);
  PlanarChainParams cp;
  cp.mass = Eigen::Vector2d(p.m1, p.m2);
  cp.length = Eigen::Vector2d(p.l1, p.l2);
  cp.com = 0.5 * cp.length;
  cp.inertia = Eigen::Vector2d(p.m1 * p.l1 * p.l1 / 12, p.m2 * p.l2 * p.l2 / 12);
  cp.gravity = p.gravity;
  cp.damping_linear = Eigen::Vector2d::Constant(p.d1);
  cp.damping_quadratic = Eigen::Vector2d::Constant(p.d2);
  const PlanarChain chain(cp);
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd q = RandomVector(2, 3.0, &rng);
    const Eigen::VectorXd dq = RandomVector(2, 2.0, &rng);
    const ElComponents a = arm.Components(q, dq);
    const ElComponents b = chain.Components(q, dq);
    EXPECT_LT((a.M - b.M).norm(), 1e-12);
    EXPECT_LT((a.C - b.C).norm(), 1e-12);
    EXPECT_LT((a.g - b.g).norm(), 1e-12);
    EXPECT_LT((a.d - b.d).norm(), 1e-12);
    EXPECT_NEAR(arm.Potential(q), chain.Potential(q), 1e-12);
  }
}

GTEST_TEST(TwoLinkTest, BiasedParameters) {
  const TwoLinkParams b = BiasedTwoLinkParams(TwoLinkParams{}, 0.5, -0.5);
  EXPECT_DOUBLE_EQ(b.m1, 1.5);
  EXPECT_DOUBLE_EQ(b.l2, 0.5);
  EXPECT_DOUBLE_EQ(b.d1, 0.5);
  EXPECT_DOUBLE_EQ(b.d2, 1.5);
}

GTEST_TEST(ModelTest, MassMatrixPositiveDefinite) {
  const TwoLink arm{TwoLinkParams{}};
  FemRodParams fp;
  fp.n_elems = 8;
  const auto rod = MakeFemRod(fp);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::LLT<Eigen::MatrixXd> a(arm.MassMatrix(RandomVector(2, M_PI, &rng)));
    Eigen::LLT<Eigen::MatrixXd> b(rod->MassMatrix(RandomVector(8, M_PI, &rng)));
    EXPECT_EQ(a.info(), Eigen::Success);
    EXPECT_EQ(b.info(), Eigen::Success);
  }
}

GTEST_TEST(FemRodTest, StraightRodIsEquilibrium) {
  FemRodParams fp;
  fp.n_elems = 6;
  const auto rod = MakeFemRod(fp);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(6);
  const Eigen::VectorXd ddq = ForwardDynamics(rod->Components(z, z), z, z);
  EXPECT_LT(ddq.norm(), 1e-14);
}

GTEST_TEST(FemRodTest, GravityIsOdd) {
  FemRodParams fp;
  fp.n_elems = 2;
  const auto rod = MakeFemRod(fp);
  const Eigen::Vector2d q(0.4, 0.4);
  EXPECT_LT((rod->PotentialForce(q) + rod->PotentialForce(-q)).norm(), 1e-15);
  EXPECT_GT(rod->PotentialForce(q).norm(), 0.0);
}

GTEST_TEST(FemRodTest, DefaultInertia) {
  FemRodParams fp;
  fp.n_elems = 5;
  const auto rod = MakeFemRod(fp);
  EXPECT_DOUBLE_EQ(rod->params().inertia(0), 1.0 / (12.0 * 125.0));
}

GTEST_TEST(FemRodTest, MassMatrixMatchesJacobianSum) {
  FemRodParams fp;
  fp.n_elems = 5;
  const auto rod = MakeFemRod(fp);
  const PlanarChainParams& cp = rod->params();
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd q = RandomVector(5, 1.5, &rng);
    const Eigen::VectorXd th = rod->AbsoluteAngles(q);
    // Joint positions: joint j sits at the distal end of link j−1.
    std::vector<Eigen::Vector2d> joint(5);
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    for (int j = 0; j < 5; ++j) {
      joint[j] = p;
      p += cp.length(j) * Eigen::Vector2d(std::cos(th(j)), std::sin(th(j)));
    }
    const Eigen::Matrix2Xd com = rod->ComPositions(q);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
    for (int k = 0; k < 5; ++k) {
      Eigen::MatrixXd jv = Eigen::MatrixXd::Zero(2, 5);
      Eigen::RowVectorXd jw = Eigen::RowVectorXd::Zero(5);
      for (int j = 0; j <= k; ++j) {
        const Eigen::Vector2d r = com.col(k) - joint[j];
        jv.col(j) = Eigen::Vector2d(-r.y(), r.x());
        jw(j) = 1.0;
      }
      m += cp.mass(k) * jv.transpose() * jv +
           cp.inertia(k) * jw.transpose() * jw;
    }
    const Eigen::MatrixXd mm = rod->MassMatrix(q);
    EXPECT_LT((mm - m).norm() / m.norm(), 1e-9);
  }
}

GTEST_TEST(ForwardDynamicsTest, ForceBalance) {
  const TwoLink arm{TwoLinkParams{}};
  const Eigen::Vector2d q(0.5, -0.3), dq(0.7, 1.1);
  const ElComponents c = arm.Components(q, dq);
  const Eigen::VectorXd tau = c.C * dq + c.g + c.d;
  EXPECT_LT(ForwardDynamics(c, dq, tau).norm(), 1e-14);
}

GTEST_TEST(ForwardDynamicsTest, IdentityMass) {
  ElComponents c;
  c.M = Eigen::MatrixXd::Identity(2, 2);
  c.C = Eigen::MatrixXd::Zero(2, 2);
  c.g = c.d = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd a =
      ForwardDynamics(c, Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0));
  EXPECT_EQ(a, Eigen::VectorXd(Eigen::Vector2d(1, 0)));
}

GTEST_TEST(ForwardDynamicsTest, ExplicitInverseAtRest) {
  const TwoLink arm{TwoLinkParams{}};
  const Eigen::Vector2d z = Eigen::Vector2d::Zero();
  const ElComponents c = arm.Components(z, z);
  const double det = c.M(0, 0) * c.M(1, 1) - c.M(0, 1) * c.M(1, 0);
  const Eigen::Vector2d expected(c.M(1, 1) / det, -c.M(1, 0) / det);
  const Eigen::VectorXd a = ForwardDynamics(c, z, Eigen::Vector2d(1, 0));
  EXPECT_LT((a - expected).norm(), 1e-13);
}

GTEST_TEST(IntegrateTest, LinearFlowIsExact) {
  const FreeBody body(3);
  FunctionController zero = ZeroTorque(3);
  const Eigen::Vector3d v(0.5, -1.0, 2.0);
  const Trajectory traj =
      Integrate(body, &zero, {Eigen::Vector3d::Zero(), v}, 1.0, 0.01);
  ASSERT_EQ(traj.size(), 101);
  for (int k = 0; k < traj.size(); ++k) {
    EXPECT_LT((traj.q[k] - v * traj.t[k]).norm(), 1e-12);
  }
}

GTEST_TEST(IntegrateTest, UndampedTwoLinkConservesEnergy) {
  TwoLinkParams p;
  p.d1 = p.d2 = 0.0;
  const TwoLink arm(p);
  FunctionController zero = ZeroTorque(2);
  const JointState x0{Eigen::Vector2d(1.0, -0.5), Eigen::Vector2d(0.5, 1.0)};
  const Trajectory traj = Integrate(arm, &zero, x0, 10.0, 1e-4);
  const double e0 = arm.TotalEnergy(x0.q, x0.dq);
  double worst = 0.0;
  for (int k = 0; k < traj.size(); ++k) {
    worst = std::max(worst,
                     std::abs(arm.TotalEnergy(traj.q[k], traj.dq[k]) - e0));
  }
  EXPECT_LT(worst / e0, 1e-6);
}

GTEST_TEST(IntegrateTest, DampedEnergyNonIncreasing) {
  const TwoLink arm{TwoLinkParams{}};
  FunctionController zero = ZeroTorque(2);
  const Trajectory traj = Integrate(
      arm, &zero, {Eigen::Vector2d(1.0, -0.5), Eigen::Vector2d(2.0, 1.0)}, 5.0,
      1e-3);
  double prev = arm.TotalEnergy(traj.q[0], traj.dq[0]);
  for (int k = 1; k < traj.size(); ++k) {
    const double e = arm.TotalEnergy(traj.q[k], traj.dq[k]);
    EXPECT_LE(e, prev + 1e-9);
    prev = e;
  }
}

GTEST_TEST(IntegrateTest, DampedRodEnergyNonIncreasing) {
  FemRodParams fp = RescaledFemRodParams(FemRodParams{}, 6);
  const auto rod = MakeFemRod(fp);
  FunctionController zero = ZeroTorque(6);
  const Trajectory traj = Integrate(
      *rod, &zero, {Eigen::VectorXd::Constant(6, 0.2), Eigen::VectorXd::Zero(6)},
      0.5, 2e-5);
  ASSERT_FALSE(traj.diverged);
  double prev = rod->TotalEnergy(traj.q[0], traj.dq[0]);
  for (int k = 1; k < traj.size(); ++k) {
    const double e = rod->TotalEnergy(traj.q[k], traj.dq[k]);
    EXPECT_LE(e, prev + 1e-9);
    prev = e;
  }
}

GTEST_TEST(IntegrateTest, SubstepsMatchFinerSampling) {
  const TwoLink arm{TwoLinkParams{}};
  FunctionController zero = ZeroTorque(2);
  const JointState x0{Eigen::Vector2d(1.0, -0.5), Eigen::Vector2d(2.0, 1.0)};
  IntegrateOptions opts;
  opts.substeps = 4;
  const Trajectory coarse = Integrate(arm, &zero, x0, 1.0, 4e-3, opts);
  const Trajectory fine = Integrate(arm, &zero, x0, 1.0, 1e-3);
  ASSERT_EQ(coarse.size(), 251);
  for (int k = 0; k < coarse.size(); ++k) {
    EXPECT_LT((coarse.q[k] - fine.q[4 * k]).norm(), 1e-13);
  }
  opts.substeps = 0;
  EXPECT_THROW(Integrate(arm, &zero, x0, 1.0, 1e-3, opts), lgpctrl::InputError);
}

GTEST_TEST(IntegrateTest, RecordStrideKeepsEveryKthSample) {
  const TwoLink arm{TwoLinkParams{}};
  FunctionController zero = ZeroTorque(2);
  const JointState x0{Eigen::Vector2d(1.0, -0.5), Eigen::Vector2d(2.0, 1.0)};
  IntegrateOptions opts;
  opts.record_every = 5;
  const Trajectory sparse = Integrate(arm, &zero, x0, 1.0, 1e-3, opts);
  const Trajectory dense = Integrate(arm, &zero, x0, 1.0, 1e-3);
  ASSERT_EQ(sparse.size(), 201);
  EXPECT_DOUBLE_EQ(sparse.dt, 5e-3);
  for (int k = 0; k < sparse.size(); ++k) {
    EXPECT_EQ(sparse.t[k], dense.t[5 * k]);
    EXPECT_EQ((sparse.q[k] - dense.q[5 * k]).norm(), 0.0);
  }
  opts.record_every = 0;
  EXPECT_THROW(Integrate(arm, &zero, x0, 1.0, 1e-3, opts), lgpctrl::InputError);
}

GTEST_TEST(IntegrateTest, DivergenceIsFlagged) {
  const FreeBody body(1);
  FunctionController push([](double, const JointState&) {
    return Eigen::VectorXd::Constant(1, 1e9);
  });
  const Trajectory traj = Integrate(
      body, &push, {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)}, 10.0,
      0.01);
  EXPECT_TRUE(traj.diverged);
  EXPECT_LT(traj.divergence_time, 1.0);
}

GTEST_TEST(CcMapTest, ExactCurvatureRecovered) {
  const CcMap map(4, 20);
  const Eigen::Vector4d q_cc(0.1, -0.4, 1.0, 2.0);
  Eigen::VectorXd q_fem(20);
  for (int j = 0; j < 20; ++j) q_fem(j) = q_cc(j / 5) / 5.0;
  EXPECT_LT((map.ReduceVector(q_fem) - q_cc).norm(), 1e-12);
  EXPECT_LT((map.ReduceVector(map.Embed(q_cc)) - q_cc).norm(), 1e-12);
  EXPECT_EQ(map.ReduceVector(Eigen::VectorXd::Zero(20)).norm(), 0.0);
}

GTEST_TEST(CcMapTest, HandPseudoInverse) {
  const CcMap map(2, 4);
  Eigen::Matrix<double, 2, 4> pinv;
  pinv << 1, 1, 0, 0, 0, 0, 1, 1;
  const Eigen::Vector4d q(0.3, -0.2, 0.9, 0.05);
  EXPECT_LT((map.ReduceVector(q) - pinv * q).norm(), 1e-15);
}

GTEST_TEST(CcMapTest, ActuationIsVirtualWorkConsistent) {
  std::mt19937_64 rng(25);
  for (int n : {4, 7, 20}) {
    const CcMap map(n == 7 ? 3 : 4, n);
    const int m = map.n_segments();
    const Eigen::VectorXd tau = RandomVector(m, 3.0, &rng);
    EXPECT_LT((map.matrix().transpose() * map.Actuate(tau) - tau).norm(), 1e-12);
    EXPECT_EQ(map.Actuate(Eigen::VectorXd::Zero(m)).norm(), 0.0);
  }
  const CcMap single(1, 4);
  EXPECT_LT((single.Actuate(Eigen::VectorXd::Ones(1)) - Eigen::Vector4d::Ones())
                .norm(),
            1e-15);
}

GTEST_TEST(CcChainTest, UnbiasedChainIsConstrainedRod) {
  FemRodParams fp = RescaledFemRodParams(FemRodParams{}, 8);
  const auto rod = MakeFemRod(fp);
  const CcMap map(2, 8);
  const auto cc = MakeCcChain(BiasedCcChainParams(fp, 2, 4, 0.0));
  std::mt19937_64 rng(26);
  const Eigen::MatrixXd& a = map.matrix();
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd q = RandomVector(2, 1.0, &rng);
    const Eigen::VectorXd dq = RandomVector(2, 1.0, &rng);
    const ElComponents full = rod->Components(a * q, a * dq);
    const ElComponents red = cc->Components(q, dq);
    EXPECT_LT((a.transpose() * full.M * a - red.M).norm(), 1e-12);
    EXPECT_LT((a.transpose() * full.C * a - red.C).norm(), 1e-12);
    EXPECT_LT((a.transpose() * full.g - red.g).norm(), 1e-12);
    EXPECT_LT((a.transpose() * full.d - red.d).norm(), 1e-12);
  }
}

}  // namespace
}  // namespace dynamics
}  // namespace lgpctrl
