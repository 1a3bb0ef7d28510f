#include "coop/gait.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace coop {
namespace {

int stance_total(const ContactState& c) {
  int n = 0;
  for (const auto& a : c) {
    for (bool b : a) n += b ? 1 : 0;
  }
  return n;
}

TEST(Gait, TrotPhases) {
  const GaitConfig g;
  const ContactState c0 = contact_state(0.0, g);
  EXPECT_EQ(stance_total(c0), 4);
  for (const auto& a : c0) {
    EXPECT_TRUE(a[0] && a[3]);
    EXPECT_FALSE(a[1] || a[2]);
  }
  const ContactState c1 = contact_state(0.2, g);
  EXPECT_EQ(stance_total(c1), 4);
  for (const auto& a : c1) {
    EXPECT_TRUE(a[1] && a[2]);
    EXPECT_FALSE(a[0] || a[3]);
  }
}

TEST(Gait, StandUsesAllLegs) {
  GaitConfig g;
  g.mode = GaitMode::Stand;
  EXPECT_EQ(stance_total(contact_state(0.13, g)), 8);
}

TEST(Gait, PeriodicAndSynchronized) {
  const GaitConfig g;
  for (int k = 0; k < 400; ++k) {
    const double t = 0.0037 * k;
    const ContactState a = contact_state(t, g);
    EXPECT_EQ(a, contact_state(t + g.period(), g));
    EXPECT_EQ(a[0], a[1]);
  }
}

TEST(Gait, TimeToPhaseEnd) {
  const GaitConfig g;
  EXPECT_NEAR(time_to_phase_end(0.05, Leg::LF, g), 0.15, 1e-9);
  EXPECT_NEAR(time_to_phase_end(0.05, Leg::RF, g), 0.15, 1e-9);
}

TEST(Gait, RaibertFoothold) {
  const Vec3 hip(1.0, 0.2, 0.3);
  const Vec3 v(0.5, 0, 0);
  const double k = raibert_gain(0.26, 9.81);
  EXPECT_NEAR(k, 0.1628, 1e-4);
  Vec3 p = raibert_foothold(hip, v, v, 0.2, k, 0.0);
  EXPECT_NEAR(p.x() - hip.x(), 0.05, 1e-15);
  EXPECT_EQ(p.z(), 0.0);
  p = raibert_foothold(hip, Vec3::Zero(), Vec3::Zero(), 0.2, k, 0.04);
  EXPECT_EQ(p, Vec3(1.0, 0.2, 0.04));
  p = raibert_foothold(hip, Vec3(0.6, 0, 0), v, 0.2, 0.163, 0.0);
  EXPECT_NEAR(p.x() - hip.x(), 0.0763, 1e-12);
}

TEST(Gait, ReferenceForZeroCommand) {
  const ModelParams params;
  CoupledState x = testing::level_formation(params);
  x.agents[0].position.z() = 0.2;
  const auto ref = reference_trajectory(x, 0.0, CommandProfile::constant(0.0), 5, 0.005, x);
  for (const auto& z : ref) {
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(z.segment<2>(12 * i + kPos), x.agents[i].position.head<2>());
      EXPECT_EQ(z(12 * i + kPos + 2), 0.26);
      EXPECT_EQ(z.segment<3>(12 * i + kRot), Vec3::Zero());
    }
  }
}

TEST(Gait, ReferenceAdvancesWithCommand) {
  const ModelParams params;
  const CoupledState x = testing::level_formation(params);
  const auto ref = reference_trajectory(x, 1.0, CommandProfile::constant(0.5), 5, 0.005, x);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(ref[k](kPos), 0.0025 * (k + 1), 1e-15);
    EXPECT_EQ(ref[k](kVel), 0.5);
  }
}

TEST(Gait, ReferenceYawTarget) {
  const ModelParams params;
  const CoupledState x = testing::level_formation(params);
  const auto ref =
      reference_trajectory(x, 0.0, CommandProfile::constant(0.0, 0.0, 0.4), 5, 0.005, x);
  EXPECT_NEAR(ref[4](kRot + 2), 0.4 * 0.025, 1e-14);
  EXPECT_NEAR(ref[4](kRot), 0.0, 1e-15);
  EXPECT_EQ(ref[4](kOmega + 2), 0.4);
}

// Ramp 0 -> 0.5 m/s over 1 s: positions follow the trapezoid rule exactly.
TEST(Gait, RampMatchesTrapezoidOracle) {
  CommandProfile cmd;
  cmd.knots = {{0.0, 0.0, 0.0, 0.0}, {1.0, 0.5, 0.0, 0.0}};
  const ModelParams params;
  const CoupledState x = testing::level_formation(params);
  const double dt = 0.005;
  const double t0 = 0.49;
  const auto ref = reference_trajectory(x, t0, cmd, 5, dt, x);
  double pos = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const double a = t0 + (k - 1) * dt, b = t0 + k * dt;
    pos += 0.5 * dt * (0.5 * a + 0.5 * b);
    EXPECT_NEAR(ref[k - 1](kVel), 0.5 * b, 1e-12);
    EXPECT_NEAR(ref[k - 1](kPos), pos, 1e-12);
  }
}

}  // namespace
}  // namespace coop
