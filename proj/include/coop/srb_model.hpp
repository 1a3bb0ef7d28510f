#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "coop/so3.hpp"

namespace coop {

enum class Leg : int { LF = 0, RF = 1, LH = 2, RH = 3 };
inline constexpr int kLegsPerAgent = 4;
inline constexpr int kNumAgents = 2;

const char* leg_name(Leg leg);

/// Physical parameters of one single-rigid-body agent.
struct AgentParams {
  double mass = 12.45;  // kg
  // Box approximation of an A1-class torso, kg m^2.
  Mat3 inertia = Vec3(0.0168, 0.0565, 0.0647).asDiagonal();
  // Bar attachment in the body frame, m.
  Vec3 interaction_offset = Vec3(0.0, 0.0, 0.15);
  double standing_height = 0.26;  // m
  // Nominal foot positions under the hips, body frame (z ignored), m.
  std::array<Vec3, kLegsPerAgent> hip_offsets = {
      Vec3(0.183, 0.13, 0.0), Vec3(0.183, -0.13, 0.0),
      Vec3(-0.183, 0.13, 0.0), Vec3(-0.183, -0.13, 0.0)};
};

struct ModelParams {
  std::array<AgentParams, kNumAgents> agents{};
  double gravity = 9.81;   // m/s^2
  double bar_length = 1.0; // m, distance between interaction points

  double psi0() const { return 0.5 * bar_length * bar_length; }
};

struct AgentState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  RotationMatrix rotation = Mat3::Identity();
  Vec3 omega_body = Vec3::Zero();
};

struct CoupledState {
  std::array<AgentState, kNumAgents> agents{};
};

struct Foothold {
  Leg leg = Leg::LF;
  Vec3 position = Vec3::Zero();  // world frame
  bool in_contact = false;
};

struct AgentFeet {
  std::array<Foothold, kLegsPerAgent> legs{};

  int stance_count() const;
  /// Stance legs in leg-id order; this is also the stacking order of AgentGrf.
  std::vector<Leg> stance_legs() const;
};

using FootholdSet = std::array<AgentFeet, kNumAgents>;

/// Stacked ground reaction forces (N) of one agent's stance legs, 3 per leg.
using AgentGrf = Eigen::VectorXd;
using GrfInput = std::array<AgentGrf, kNumAgents>;

/// Loads the planners never see: disturbances at the COM and the payload
/// share carried at the interaction point. World frame, N.
struct ExternalLoad {
  Vec3 force_at_com = Vec3::Zero();
  Vec3 force_at_interaction = Vec3::Zero();
};
using ExternalLoads = std::array<ExternalLoad, kNumAgents>;

struct Wrench {
  Vec3 force = Vec3::Zero();   // N
  Vec3 torque = Vec3::Zero();  // N m, about the COM, world frame
};

struct PsiStack {
  double psi = 0.0;
  double psi_dot = 0.0;
  double psi_ddot = 0.0;
};

struct AgentStateDerivative {
  Vec3 position_dot = Vec3::Zero();
  Vec3 velocity_dot = Vec3::Zero();
  Mat3 rotation_dot = Mat3::Zero();
  Vec3 omega_dot = Vec3::Zero();
};
using StateDerivative = std::array<AgentStateDerivative, kNumAgents>;

/// psi_ddot = offset + slope * lambda.
struct LambdaAffine {
  double offset = 0.0;
  double slope = 0.0;
};

Vec3 interaction_point(const AgentState& s, const AgentParams& p);
Vec3 interaction_velocity(const AgentState& s, const AgentParams& p);

/// Sum of the stance GRFs plus the bar force (p_self - p_other) * lambda
/// acting at p_self. Torques are about the COM in the world frame.
Wrench net_wrench(const AgentState& s, const AgentFeet& feet, const AgentGrf& u,
                  const Vec3& p_self, const Vec3& p_other, double lambda);

StateDerivative dynamics(const CoupledState& x, const GrfInput& u, double lambda,
                         const FootholdSet& feet, const ModelParams& params,
                         const ExternalLoads& loads = {});

PsiStack psi_stack(const CoupledState& x, const GrfInput& u, double lambda,
                   const FootholdSet& feet, const ModelParams& params,
                   const ExternalLoads& loads = {});

LambdaAffine psi_ddot_affine(const CoupledState& x, const GrfInput& u,
                             const FootholdSet& feet, const ModelParams& params,
                             const ExternalLoads& loads = {});

/// Bar multiplier enforcing psi_ddot + 2 a psi_dot + a^2 (psi - psi0) = 0.
/// alpha = 0 gives the exact acceleration-level condition. Throws
/// std::runtime_error when the lambda coefficient is below 1e-9.
double solve_lambda(const CoupledState& x, const GrfInput& u, const FootholdSet& feet,
                    const ModelParams& params, double baumgarte_alpha,
                    const ExternalLoads& loads = {});

/// Kinetic plus gravitational potential energy of both bodies (the bar is massless).
double mechanical_energy(const CoupledState& x, const ModelParams& params);

/// Moves agent 2 along the bar direction so psi = psi0 and removes the relative
/// interaction-point velocity along the bar so psi_dot = 0.
CoupledState project_to_manifold(const CoupledState& x, const ModelParams& params);

bool is_finite(const CoupledState& x);

}  // namespace coop
