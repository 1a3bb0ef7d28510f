#pragma once

#include <Eigen/Dense>

#include "coop/srb_model.hpp"

namespace coop {

inline constexpr int kAgentStateDim = 12;
inline constexpr int kStateDim = kAgentStateDim * kNumAgents;

/// Local coordinates (r, v, xi, omega_body) per agent, agent 1 first, where
/// R = R_op exp(hat(xi)) with the chart frozen at the operating point.
using LocalState = Eigen::Matrix<double, kStateDim, 1>;
using AgentLocalState = Eigen::Matrix<double, kAgentStateDim, 1>;

// Offsets inside one agent's 12-block.
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kRot = 6;
inline constexpr int kOmega = 9;

struct OperatingPoint {
  CoupledState x;
  GrfInput u;
  double lambda = 0.0;
  FootholdSet feet;

  int grf_dim(int agent) const { return 3 * feet[agent].stance_count(); }
  int grf_dim() const { return grf_dim(0) + grf_dim(1); }
};

/// x+ = A x + B u + C lambda + d in local coordinates (absolute, not deviation).
/// u stacks agent 1's stance GRFs then agent 2's.
struct LtvModel {
  Eigen::MatrixXd A;  // 24 x 24
  Eigen::MatrixXd B;  // 24 x 3 m_u
  Eigen::VectorXd C;  // 24
  Eigen::VectorXd d;  // 24
  double dt = 0.005;
  std::array<int, kNumAgents> grf_dims{};

  int m_u() const { return (grf_dims[0] + grf_dims[1]) / 3; }
  int grf_offset(int agent) const { return agent == 0 ? 0 : grf_dims[0]; }
};

/// Psi(x, u, lambda) = (psi - psi0, psi_dot, psi_ddot) ~= E dx + F du + G dlambda + h,
/// deviations taken about the operating point.
struct EqConstraintLin {
  Eigen::Matrix<double, 3, kStateDim> E;
  Eigen::MatrixXd F;  // 3 x 3 m_u
  Eigen::Vector3d G;
  Eigen::Vector3d h;
};

/// Throws std::domain_error when a rotation is more than pi/2 from the chart origin.
LocalState to_local(const CoupledState& x, const CoupledState& chart);
CoupledState from_local(const LocalState& z, const CoupledState& chart);

/// Continuous-time vector field in the local chart.
LocalState local_vector_field(const LocalState& z, const Eigen::VectorXd& u, double lambda,
                              const OperatingPoint& op, const ModelParams& params,
                              const ExternalLoads& loads = {});

/// Forward-Euler step of the nonlinear model in the local chart.
LocalState euler_step(const LocalState& z, const Eigen::VectorXd& u, double lambda,
                      const OperatingPoint& op, const ModelParams& params, double dt);

Eigen::VectorXd stack_grf(const GrfInput& u);
GrfInput split_grf(const Eigen::VectorXd& u, const FootholdSet& feet);

/// Central-difference linearization; throws std::runtime_error on non-finite entries.
LtvModel linearize_dynamics(const OperatingPoint& op, const ModelParams& params,
                            double dt = 0.005, double fd_step = 1e-6);

Eigen::Vector3d constraint_residual(const LocalState& z, const Eigen::VectorXd& u,
                                    double lambda, const OperatingPoint& op,
                                    const ModelParams& params);

EqConstraintLin linearize_constraint(const OperatingPoint& op, const ModelParams& params,
                                     double fd_step = 1e-6);

}  // namespace coop
