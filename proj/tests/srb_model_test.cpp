#include "coop/srb_model.hpp"

#include <random>

#include <gtest/gtest.h>

#include "coop/sim.hpp"
#include "test_support.hpp"

namespace coop {
namespace {

using testing::feet_under_hips;
using testing::kAllFeet;
using testing::kTrotPair;
using testing::level_formation;
using testing::rand_vec;
using testing::random_formation;
using testing::random_grf;
using testing::weight_share;

const ModelParams kParams;

TEST(SrbModel, InteractionPointAtRest) {
  AgentState s;
  s.position = Vec3(0, 0, 0.26);
  EXPECT_LT((interaction_point(s, kParams.agents[0]) - Vec3(0, 0, 0.41)).norm(), 1e-15);
  s.rotation = so3::rot_z(0.7);
  EXPECT_NEAR(interaction_point(s, kParams.agents[0]).z(), 0.41, 1e-15);
}

TEST(SrbModel, InteractionPointMatchesArithmetic) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    AgentState s;
    s.position = rand_vec(rng, 1.0);
    s.rotation = so3::exp(rand_vec(rng, 2.0));
    const Vec3 d = kParams.agents[0].interaction_offset;
    Vec3 p;
    for (int r = 0; r < 3; ++r) {
      p(r) = s.position(r);
      for (int c = 0; c < 3; ++c) p(r) += s.rotation(r, c) * d(c);
    }
    EXPECT_LT((interaction_point(s, kParams.agents[0]) - p).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(SrbModel, PsiOfStaticFormation) {
  const CoupledState x = level_formation(kParams);
  const FootholdSet feet = feet_under_hips(x, kParams, kAllFeet);
  const PsiStack s = psi_stack(x, weight_share(feet, kParams), 0.0, feet, kParams);
  EXPECT_NEAR(s.psi, 0.5, 1e-15);
  EXPECT_EQ(s.psi_dot, 0.0);
}

TEST(SrbModel, RigidTranslationHasNoPsiRate) {
  CoupledState x = level_formation(kParams);
  x.agents[0].velocity = x.agents[1].velocity = Vec3(0.4, -0.2, 0.1);
  const FootholdSet feet = feet_under_hips(x, kParams, kAllFeet);
  EXPECT_NEAR(psi_stack(x, weight_share(feet, kParams), 0.0, feet, kParams).psi_dot, 0.0, 1e-15);
}

TEST(SrbModel, PsiDdotMatchesTimeDerivativeOfPsiDot) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    OperatingPoint op;
    op.x = random_formation(rng, kParams);
    op.feet = feet_under_hips(op.x, kParams, t % 2 ? kAllFeet : kTrotPair);
    op.u = random_grf(rng, op.feet, kParams);
    const double lambda = std::uniform_real_distribution<double>(-30, 30)(rng);
    const Eigen::VectorXd u = stack_grf(op.u);
    const LocalState z0 = to_local(op.x, op.x);
    const LocalState f = local_vector_field(z0, u, lambda, op, kParams);
    const double h = 1e-5;
    auto psi_dot_at = [&](const LocalState& z) {
      return psi_stack(from_local(z, op.x), op.u, lambda, op.feet, kParams).psi_dot;
    };
    const double fd = (psi_dot_at(z0 + h * f) - psi_dot_at(z0 - h * f)) / (2 * h);
    EXPECT_NEAR(psi_stack(op.x, op.u, lambda, op.feet, kParams).psi_ddot, fd, 1e-5);
  }
}

TEST(SrbModel, NetWrenchSingleLegBelowCom) {
  AgentState s;
  s.position = Vec3(0.1, 0.2, 0.26);
  AgentFeet feet;
  feet.legs[0] = {Leg::LF, Vec3(0.1, 0.2, 0.0), true};
  const double mg = 12.45 * 9.81;
  const Wrench w = net_wrench(s, feet, Vec3(0, 0, mg), Vec3::Zero(), Vec3::Zero(), 0.0);
  EXPECT_LT((w.force - Vec3(0, 0, 122.1345)).norm(), 1e-12);
  EXPECT_LT(w.torque.norm(), 1e-12);

  AgentFeet none;
  const Wrench z = net_wrench(s, none, Eigen::VectorXd(0), Vec3(1, 0, 0), Vec3(0, 0, 0), 0.0);
  EXPECT_EQ(z.force, Vec3::Zero());
  EXPECT_EQ(z.torque, Vec3::Zero());
}

TEST(SrbModel, NetWrenchMatchesComponentExpansion) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    const CoupledState x = random_formation(rng, kParams);
    const FootholdSet feet = feet_under_hips(x, kParams, kAllFeet);
    const GrfInput u = random_grf(rng, feet, kParams);
    const AgentState& s = x.agents[0];
    const Vec3 p0 = interaction_point(s, kParams.agents[0]);
    const Vec3 p1 = interaction_point(x.agents[1], kParams.agents[0]);
    const double lambda = 7.5;
    const Wrench w = net_wrench(s, feet[0], u[0], p0, p1, lambda);
    double f[3] = {0, 0, 0}, tq[3] = {0, 0, 0};
    auto add = [&](const Vec3& at, const Vec3& force) {
      const double rx = at.x() - s.position.x(), ry = at.y() - s.position.y(),
                   rz = at.z() - s.position.z();
      f[0] += force.x();
      f[1] += force.y();
      f[2] += force.z();
      tq[0] += ry * force.z() - rz * force.y();
      tq[1] += rz * force.x() - rx * force.z();
      tq[2] += rx * force.y() - ry * force.x();
    };
    for (int l = 0; l < 4; ++l) add(feet[0].legs[l].position, u[0].segment<3>(3 * l));
    add(p0, lambda * (p0 - p1));
    EXPECT_LT((w.force - Vec3(f[0], f[1], f[2])).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((w.torque - Vec3(tq[0], tq[1], tq[2])).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SrbModel, NetWrenchSuperposition) {
  std::mt19937_64 rng(14);
  const CoupledState x = random_formation(rng, kParams);
  const FootholdSet feet = feet_under_hips(x, kParams, kAllFeet);
  const Vec3 p0 = interaction_point(x.agents[0], kParams.agents[0]);
  const Vec3 p1 = interaction_point(x.agents[1], kParams.agents[1]);
  const GrfInput ua = random_grf(rng, feet, kParams), ub = random_grf(rng, feet, kParams);
  const double la = 3.0, lb = -11.0, a = 0.7, b = -1.3;
  const Wrench wa = net_wrench(x.agents[0], feet[0], ua[0], p0, p1, la);
  const Wrench wb = net_wrench(x.agents[0], feet[0], ub[0], p0, p1, lb);
  const Wrench wc = net_wrench(x.agents[0], feet[0], a * ua[0] + b * ub[0], p0, p1, a * la + b * lb);
  EXPECT_LT((wc.force - a * wa.force - b * wb.force).norm(), 1e-12);
  EXPECT_LT((wc.torque - a * wa.torque - b * wb.torque).norm(), 1e-12);
}

TEST(SrbModel, HoverIsEquilibrium) {
  const CoupledState x = level_formation(kParams);
  const FootholdSet feet = feet_under_hips(x, kParams, kAllFeet);
  const StateDerivative d = dynamics(x, weight_share(feet, kParams), 0.0, feet, kParams);
  for (const auto& a : d) {
    EXPECT_LT(a.position_dot.norm(), 1e-15);
    EXPECT_LT(a.velocity_dot.norm(), 1e-12);
    EXPECT_LT(a.rotation_dot.norm(), 1e-15);
    EXPECT_LT(a.omega_dot.norm(), 1e-12);
  }
}

TEST(SrbModel, FreeFall) {
  const CoupledState x = level_formation(kParams);
  FootholdSet feet = feet_under_hips(x, kParams, {false, false, false, false});
  const GrfInput u{Eigen::VectorXd(0), Eigen::VectorXd(0)};
  for (const auto& a : dynamics(x, u, 0.0, feet, kParams)) {
    EXPECT_LT((a.velocity_dot - Vec3(0, 0, -9.81)).norm(), 1e-15);
  }
}

// Energy-rate oracle: dE/dt equals the power of the non-gravitational wrench,
// f . v + (R' tau) . omega_body, independently of how the equations are coded.
TEST(SrbModel, DynamicsMatchesWrenchPower) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 30; ++t) {
    OperatingPoint op;
    op.x = random_formation(rng, kParams);
    op.feet = feet_under_hips(op.x, kParams, kAllFeet);
    op.u = random_grf(rng, op.feet, kParams);
    const double lambda = std::uniform_real_distribution<double>(-20, 20)(rng);
    const LocalState z0 = to_local(op.x, op.x);
    const LocalState f = local_vector_field(z0, stack_grf(op.u), lambda, op, kParams);
    const double h = 1e-6;
    const double dE = (mechanical_energy(from_local(z0 + h * f, op.x), kParams) -
                       mechanical_energy(from_local(z0 - h * f, op.x), kParams)) /
                      (2 * h);
    double power = 0.0;
    for (int i = 0; i < 2; ++i) {
      const AgentState& s = op.x.agents[i];
      const Vec3 pi = interaction_point(s, kParams.agents[i]);
      const Vec3 pj = interaction_point(op.x.agents[1 - i], kParams.agents[1 - i]);
      const Wrench w = net_wrench(s, op.feet[i], op.u[i], pi, pj, lambda);
      power += w.force.dot(s.velocity) + (s.rotation.transpose() * w.torque).dot(s.omega_body);
    }
    EXPECT_NEAR(dE, power, 1e-8 * (1.0 + std::abs(power)));
  }
}

TEST(SrbModel, PsiDdotIsAffineInLambda) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 30; ++t) {
    const CoupledState x = random_formation(rng, kParams);
    const FootholdSet feet = feet_under_hips(x, kParams, kTrotPair);
    const GrfInput u = random_grf(rng, feet, kParams);
    const double l[3] = {-40.0, 3.0, 55.0};
    double y[3];
    for (int k = 0; k < 3; ++k) y[k] = psi_stack(x, u, l[k], feet, kParams).psi_ddot;
    const double slope = (y[2] - y[0]) / (l[2] - l[0]);
    EXPECT_NEAR(y[1], y[0] + slope * (l[1] - l[0]), 1e-10 * (1.0 + std::abs(y[1])));
    const LambdaAffine aff = psi_ddot_affine(x, u, feet, kParams);
    EXPECT_NEAR(aff.slope, slope, 1e-8 * std::abs(slope));
  }
}

TEST(SrbModel, SymmetricHoverNeedsNoBarForce) {
  const CoupledState x = level_formation(kParams);
  const FootholdSet feet = feet_under_hips(x, kParams, kAllFeet);
  EXPECT_NEAR(solve_lambda(x, weight_share(feet, kParams), feet, kParams, 0.0), 0.0, 1e-9);
}

TEST(SrbModel, SolveLambdaZeroesResidual) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 50; ++t) {
    CoupledState x = random_formation(rng, kParams);
    x.agents[1].position += rand_vec(rng, 0.01);  // off-manifold for the Baumgarte terms
    const FootholdSet feet = feet_under_hips(x, kParams, kTrotPair);
    const GrfInput u = random_grf(rng, feet, kParams);
    const double l0 = solve_lambda(x, u, feet, kParams, 0.0);
    EXPECT_LT(std::abs(psi_stack(x, u, l0, feet, kParams).psi_ddot), 1e-9);
    const double a = 20.0;
    const double l1 = solve_lambda(x, u, feet, kParams, a);
    const PsiStack s = psi_stack(x, u, l1, feet, kParams);
    EXPECT_LT(std::abs(s.psi_ddot + 2 * a * s.psi_dot + a * a * (s.psi - kParams.psi0())), 1e-9);
  }
}

// RK4 at 1 ms holds the bar length of a tumbling free-flight pair; drift
// without stabilization stays small.
TEST(SrbModel, ConstraintDriftUnderRk4) {
  std::mt19937_64 rng(18);
  const CoupledState x0 = random_formation(rng, kParams, 1.0);
  const FootholdSet feet = feet_under_hips(x0, kParams, {false, false, false, false});
  const GrfInput u{Eigen::VectorXd(0), Eigen::VectorXd(0)};
  auto drift = [&](double alpha, int steps) {
    CoupledState x = x0;
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
      x = rk4_step(x, u, feet, kParams, {}, alpha, 1e-3);
      const PsiStack s = psi_stack(x, u, 0.0, feet, kParams);
      worst = std::max(worst, std::abs(s.psi - kParams.psi0()));
    }
    return worst;
  };
  EXPECT_LT(drift(0.0, 1000), 1e-6);
  EXPECT_LT(drift(20.0, 10000), 1e-8);
}

TEST(SrbModel, ProjectToManifold) {
  std::mt19937_64 rng(19);
  CoupledState x = level_formation(kParams);
  x.agents[1].position += rand_vec(rng, 0.05);
  x.agents[1].velocity = rand_vec(rng, 0.5);
  const CoupledState p = project_to_manifold(x, kParams);
  const FootholdSet feet = feet_under_hips(p, kParams, kAllFeet);
  const PsiStack s = psi_stack(p, weight_share(feet, kParams), 0.0, feet, kParams);
  EXPECT_NEAR(s.psi, kParams.psi0(), 1e-12);
  EXPECT_NEAR(s.psi_dot, 0.0, 1e-12);
}

}  // namespace
}  // namespace coop
