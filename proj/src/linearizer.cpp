#include "coop/linearizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coop {

LocalState to_local(const CoupledState& x, const CoupledState& chart) {
  LocalState z;
  for (int i = 0; i < kNumAgents; ++i) {
    const AgentState& s = x.agents[i];
    const Mat3 rel = chart.agents[i].rotation.transpose() * s.rotation;
    const Vec3 xi = so3::log(rel);
    if (xi.norm() >= 0.5 * std::numbers::pi) {
      throw std::domain_error("to_local: rotation offset exceeds pi/2");
    }
    auto blk = z.segment<kAgentStateDim>(kAgentStateDim * i);
    blk.segment<3>(kPos) = s.position;
    blk.segment<3>(kVel) = s.velocity;
    blk.segment<3>(kRot) = xi;
    blk.segment<3>(kOmega) = s.omega_body;
  }
  return z;
}

CoupledState from_local(const LocalState& z, const CoupledState& chart) {
  CoupledState x;
  for (int i = 0; i < kNumAgents; ++i) {
    const auto blk = z.segment<kAgentStateDim>(kAgentStateDim * i);
    AgentState& s = x.agents[i];
    s.position = blk.segment<3>(kPos);
    s.velocity = blk.segment<3>(kVel);
    s.rotation = chart.agents[i].rotation * so3::exp(blk.segment<3>(kRot));
    s.omega_body = blk.segment<3>(kOmega);
  }
  return x;
}

Eigen::VectorXd stack_grf(const GrfInput& u) {
  Eigen::VectorXd out(u[0].size() + u[1].size());
  out << u[0], u[1];
  return out;
}

GrfInput split_grf(const Eigen::VectorXd& u, const FootholdSet& feet) {
  const int n0 = 3 * feet[0].stance_count();
  const int n1 = 3 * feet[1].stance_count();
  if (u.size() != n0 + n1) throw std::invalid_argument("split_grf: dimension mismatch");
  return {u.head(n0), u.tail(n1)};
}

LocalState local_vector_field(const LocalState& z, const Eigen::VectorXd& u, double lambda,
                              const OperatingPoint& op, const ModelParams& params,
                              const ExternalLoads& loads) {
  const CoupledState x = from_local(z, op.x);
  const auto dx = dynamics(x, split_grf(u, op.feet), lambda, op.feet, params, loads);
  LocalState f;
  for (int i = 0; i < kNumAgents; ++i) {
    auto blk = f.segment<kAgentStateDim>(kAgentStateDim * i);
    const Vec3 xi = z.segment<3>(kAgentStateDim * i + kRot);
    blk.segment<3>(kPos) = dx[i].position_dot;
    blk.segment<3>(kVel) = dx[i].velocity_dot;
    blk.segment<3>(kRot) = so3::right_jacobian_inv(xi) * x.agents[i].omega_body;
    blk.segment<3>(kOmega) = dx[i].omega_dot;
  }
  return f;
}

LocalState euler_step(const LocalState& z, const Eigen::VectorXd& u, double lambda,
                      const OperatingPoint& op, const ModelParams& params, double dt) {
  return z + dt * local_vector_field(z, u, lambda, op, params);
}

LtvModel linearize_dynamics(const OperatingPoint& op, const ModelParams& params, double dt,
                            double fd_step) {
  if (dt <= 0.0) throw std::invalid_argument("linearize_dynamics: dt must be positive");
  const LocalState z0 = to_local(op.x, op.x);
  const Eigen::VectorXd u0 = stack_grf(op.u);
  const int nu = static_cast<int>(u0.size());
  if (nu != op.grf_dim()) throw std::invalid_argument("linearize_dynamics: GRF mismatch");

  LtvModel m;
  m.dt = dt;
  m.grf_dims = {op.grf_dim(0), op.grf_dim(1)};
  m.A.setIdentity(kStateDim, kStateDim);
  m.B.resize(kStateDim, nu);

  const double inv2h = 1.0 / (2.0 * fd_step);
  for (int c = 0; c < kStateDim; ++c) {
    LocalState zp = z0, zm = z0;
    zp(c) += fd_step;
    zm(c) -= fd_step;
    m.A.col(c) += dt * inv2h *
                  (local_vector_field(zp, u0, op.lambda, op, params) -
                   local_vector_field(zm, u0, op.lambda, op, params));
  }
  for (int c = 0; c < nu; ++c) {
    Eigen::VectorXd up = u0, um = u0;
    up(c) += fd_step;
    um(c) -= fd_step;
    m.B.col(c) = dt * inv2h *
                 (local_vector_field(z0, up, op.lambda, op, params) -
                  local_vector_field(z0, um, op.lambda, op, params));
  }
  m.C = dt * inv2h *
        (local_vector_field(z0, u0, op.lambda + fd_step, op, params) -
         local_vector_field(z0, u0, op.lambda - fd_step, op, params));

  const LocalState f0 = local_vector_field(z0, u0, op.lambda, op, params);
  m.d = dt * f0 - (m.A - Eigen::MatrixXd::Identity(kStateDim, kStateDim)) * z0 - m.B * u0 -
        m.C * op.lambda;

  if (!m.A.allFinite() || !m.B.allFinite() || !m.C.allFinite() || !m.d.allFinite()) {
    throw std::runtime_error("linearize_dynamics: non-finite Jacobian entry");
  }
  return m;
}

Eigen::Vector3d constraint_residual(const LocalState& z, const Eigen::VectorXd& u,
                                    double lambda, const OperatingPoint& op,
                                    const ModelParams& params) {
  const CoupledState x = from_local(z, op.x);
  const PsiStack s = psi_stack(x, split_grf(u, op.feet), lambda, op.feet, params);
  return {s.psi - params.psi0(), s.psi_dot, s.psi_ddot};
}

EqConstraintLin linearize_constraint(const OperatingPoint& op, const ModelParams& params,
                                     double fd_step) {
  const LocalState z0 = to_local(op.x, op.x);
  const Eigen::VectorXd u0 = stack_grf(op.u);
  const int nu = static_cast<int>(u0.size());
  const double inv2h = 1.0 / (2.0 * fd_step);

  EqConstraintLin c;
  c.F.resize(3, nu);
  for (int k = 0; k < kStateDim; ++k) {
    LocalState zp = z0, zm = z0;
    zp(k) += fd_step;
    zm(k) -= fd_step;
    c.E.col(k) = inv2h * (constraint_residual(zp, u0, op.lambda, op, params) -
                          constraint_residual(zm, u0, op.lambda, op, params));
  }
  for (int k = 0; k < nu; ++k) {
    Eigen::VectorXd up = u0, um = u0;
    up(k) += fd_step;
    um(k) -= fd_step;
    c.F.col(k) = inv2h * (constraint_residual(z0, up, op.lambda, op, params) -
                          constraint_residual(z0, um, op.lambda, op, params));
  }
  c.G = inv2h * (constraint_residual(z0, u0, op.lambda + fd_step, op, params) -
                 constraint_residual(z0, u0, op.lambda - fd_step, op, params));
  c.h = constraint_residual(z0, u0, op.lambda, op, params);
  // psi and psi_dot carry no input dependence; drop finite-difference noise.
  c.F.topRows<2>().setZero();
  c.G.head<2>().setZero();
  return c;
}

}  // namespace coop
