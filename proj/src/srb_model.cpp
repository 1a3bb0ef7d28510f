#include "coop/srb_model.hpp"

#include <cmath>
#include <stdexcept>

namespace coop {

const char* leg_name(Leg leg) {
  switch (leg) {
    case Leg::LF: return "LF";
    case Leg::RF: return "RF";
    case Leg::LH: return "LH";
    case Leg::RH: return "RH";
  }
  return "?";
}

int AgentFeet::stance_count() const {
  int n = 0;
  for (const auto& f : legs) n += f.in_contact ? 1 : 0;
  return n;
}

std::vector<Leg> AgentFeet::stance_legs() const {
  std::vector<Leg> out;
  for (const auto& f : legs) {
    if (f.in_contact) out.push_back(f.leg);
  }
  return out;
}

Vec3 interaction_point(const AgentState& s, const AgentParams& p) {
  return s.position + s.rotation * p.interaction_offset;
}

Vec3 interaction_velocity(const AgentState& s, const AgentParams& p) {
  return s.velocity + s.rotation * s.omega_body.cross(p.interaction_offset);
}

Wrench net_wrench(const AgentState& s, const AgentFeet& feet, const AgentGrf& u,
                  const Vec3& p_self, const Vec3& p_other, double lambda) {
  Wrench w;
  int k = 0;
  for (const auto& f : feet.legs) {
    if (!f.in_contact) continue;
    const Vec3 uf = u.segment<3>(3 * k);
    const Vec3 lever = f.position - s.position;
    w.force += uf;
    w.torque += lever.cross(uf);
    ++k;
  }
  const Vec3 bar_force = (p_self - p_other) * lambda;
  const Vec3 eta = p_self - s.position;
  w.force += bar_force;
  w.torque += eta.cross(bar_force);
  return w;
}

namespace {

struct AgentKinematics {
  Vec3 p;
  Vec3 p_dot;
};

std::array<AgentKinematics, kNumAgents> kinematics(const CoupledState& x,
                                                   const ModelParams& params) {
  std::array<AgentKinematics, kNumAgents> k;
  for (int i = 0; i < kNumAgents; ++i) {
    k[i].p = interaction_point(x.agents[i], params.agents[i]);
    k[i].p_dot = interaction_velocity(x.agents[i], params.agents[i]);
  }
  return k;
}

void check_inputs(const GrfInput& u, const FootholdSet& feet) {
  for (int i = 0; i < kNumAgents; ++i) {
    if (u[i].size() != 3 * feet[i].stance_count()) {
      throw std::invalid_argument("GRF dimension does not match the stance set");
    }
  }
}

// Acceleration of the interaction point given body accelerations.
Vec3 interaction_acceleration(const AgentState& s, const AgentParams& p,
                              const Vec3& v_dot, const Vec3& omega_dot) {
  const Mat3 wh = so3::hat(s.omega_body);
  return v_dot + s.rotation * (wh * wh * p.interaction_offset) +
         s.rotation * omega_dot.cross(p.interaction_offset);
}

}  // namespace

StateDerivative dynamics(const CoupledState& x, const GrfInput& u, double lambda,
                         const FootholdSet& feet, const ModelParams& params,
                         const ExternalLoads& loads) {
  check_inputs(u, feet);
  const auto kin = kinematics(x, params);
  StateDerivative dx;
  for (int i = 0; i < kNumAgents; ++i) {
    const int j = 1 - i;
    const AgentState& s = x.agents[i];
    const AgentParams& p = params.agents[i];
    Wrench w = net_wrench(s, feet[i], u[i], kin[i].p, kin[j].p, lambda);
    const Vec3 eta = kin[i].p - s.position;
    w.force += loads[i].force_at_com + loads[i].force_at_interaction;
    w.torque += eta.cross(loads[i].force_at_interaction);

    auto& d = dx[i];
    d.position_dot = s.velocity;
    d.velocity_dot = w.force / p.mass - Vec3(0.0, 0.0, params.gravity);
    d.rotation_dot = s.rotation * so3::hat(s.omega_body);
    d.omega_dot = p.inertia.ldlt().solve(s.rotation.transpose() * w.torque -
                                         s.omega_body.cross(p.inertia * s.omega_body));
  }
  return dx;
}

PsiStack psi_stack(const CoupledState& x, const GrfInput& u, double lambda,
                   const FootholdSet& feet, const ModelParams& params,
                   const ExternalLoads& loads) {
  const auto kin = kinematics(x, params);
  const auto dx = dynamics(x, u, lambda, feet, params, loads);
  const Vec3 dp = kin[0].p - kin[1].p;
  const Vec3 dp_dot = kin[0].p_dot - kin[1].p_dot;
  const Vec3 a0 = interaction_acceleration(x.agents[0], params.agents[0],
                                           dx[0].velocity_dot, dx[0].omega_dot);
  const Vec3 a1 = interaction_acceleration(x.agents[1], params.agents[1],
                                           dx[1].velocity_dot, dx[1].omega_dot);
  PsiStack out;
  out.psi = 0.5 * dp.squaredNorm();
  out.psi_dot = dp.dot(dp_dot);
  out.psi_ddot = dp.dot(a0 - a1) + dp_dot.squaredNorm();
  return out;
}

LambdaAffine psi_ddot_affine(const CoupledState& x, const GrfInput& u,
                             const FootholdSet& feet, const ModelParams& params,
                             const ExternalLoads& loads) {
  const auto kin = kinematics(x, params);
  const Vec3 dp = kin[0].p - kin[1].p;
  // d(p_ddot_i)/d(lambda) for the bar force s_i * dp applied at p_i.
  Vec3 slope_acc[kNumAgents];
  for (int i = 0; i < kNumAgents; ++i) {
    const double sign = i == 0 ? 1.0 : -1.0;
    const AgentState& s = x.agents[i];
    const AgentParams& p = params.agents[i];
    const Vec3 f = sign * dp;
    const Vec3 eta = kin[i].p - s.position;
    const Vec3 domega = p.inertia.ldlt().solve(s.rotation.transpose() * eta.cross(f));
    slope_acc[i] = f / p.mass + s.rotation * domega.cross(p.interaction_offset);
  }
  LambdaAffine out;
  out.slope = dp.dot(slope_acc[0] - slope_acc[1]);
  out.offset = psi_stack(x, u, 0.0, feet, params, loads).psi_ddot;
  return out;
}

double solve_lambda(const CoupledState& x, const GrfInput& u, const FootholdSet& feet,
                    const ModelParams& params, double baumgarte_alpha,
                    const ExternalLoads& loads) {
  const LambdaAffine aff = psi_ddot_affine(x, u, feet, params, loads);
  if (std::abs(aff.slope) < 1e-9) {
    throw std::runtime_error("solve_lambda: bar direction is not actuated by lambda");
  }
  const auto kin = kinematics(x, params);
  const Vec3 dp = kin[0].p - kin[1].p;
  const double psi = 0.5 * dp.squaredNorm();
  const double psi_dot = dp.dot(kin[0].p_dot - kin[1].p_dot);
  const double a = baumgarte_alpha;
  const double target = -(2.0 * a * psi_dot + a * a * (psi - params.psi0()));
  return (target - aff.offset) / aff.slope;
}

double mechanical_energy(const CoupledState& x, const ModelParams& params) {
  double e = 0.0;
  for (int i = 0; i < kNumAgents; ++i) {
    const AgentState& s = x.agents[i];
    const AgentParams& p = params.agents[i];
    e += 0.5 * p.mass * s.velocity.squaredNorm();
    e += 0.5 * s.omega_body.dot(p.inertia * s.omega_body);
    e += p.mass * params.gravity * s.position.z();
  }
  return e;
}

CoupledState project_to_manifold(const CoupledState& x, const ModelParams& params) {
  CoupledState out = x;
  const Vec3 p0 = interaction_point(out.agents[0], params.agents[0]);
  const Vec3 p1 = interaction_point(out.agents[1], params.agents[1]);
  const Vec3 dp = p0 - p1;
  const double dist = dp.norm();
  if (dist < 1e-9) {
    throw std::invalid_argument("project_to_manifold: coincident interaction points");
  }
  const Vec3 dir = dp / dist;
  out.agents[1].position -= dir * (params.bar_length - dist);

  const Vec3 q0 = interaction_point(out.agents[0], params.agents[0]);
  const Vec3 q1 = interaction_point(out.agents[1], params.agents[1]);
  const Vec3 n = (q0 - q1).normalized();
  const Vec3 rel = interaction_velocity(out.agents[0], params.agents[0]) -
                   interaction_velocity(out.agents[1], params.agents[1]);
  out.agents[1].velocity += n * n.dot(rel);
  return out;
}

bool is_finite(const CoupledState& x) {
  for (const auto& s : x.agents) {
    if (!s.position.allFinite() || !s.velocity.allFinite() || !s.rotation.allFinite() ||
        !s.omega_body.allFinite()) {
      return false;
    }
  }
  return true;
}

}  // namespace coop
