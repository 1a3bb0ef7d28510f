#include "coop/planner_centralized.hpp"

#include <stdexcept>

namespace coop {

namespace {

std::vector<Eigen::VectorXd> as_dynamic(const std::vector<LocalState>& v, int offset, int len) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(v.size());
  for (const auto& x : v) out.emplace_back(x.segment(offset, len));
  return out;
}

GrfInput hold_command(const PlanInput& in, const std::optional<FootholdSet>& prev_feet,
                      const std::optional<GrfInput>& prev_u, const ModelParams& params) {
  return operating_grf(in.feet, prev_feet ? &*prev_feet : nullptr,
                       prev_u ? &*prev_u : nullptr, params);
}

}  // namespace

QpProblem build_centralized_qp(const OperatingPoint& op, const LtvModel& ltv,
                               const EqConstraintLin& eqc, const std::vector<LocalState>& xdes,
                               const PlannerOptions& opt) {
  const MpcWeights& w = opt.weights;
  if (static_cast<int>(xdes.size()) != w.horizon || ltv.B.cols() != op.grf_dim() ||
      eqc.F.cols() != op.grf_dim()) {
    throw std::invalid_argument("build_centralized_qp: dimension mismatch");
  }
  MpcQpSpec s;
  s.horizon = w.horizon;
  s.nx = kStateDim;
  s.nu = op.grf_dim();
  s.has_lambda = true;
  s.A = ltv.A;
  s.B = ltv.B;
  s.C = ltv.C;
  s.affine.assign(w.horizon, ltv.d);
  s.x0 = to_local(op.x, op.x);
  s.xdes = as_dynamic(xdes, 0, kStateDim);
  s.q_diag.resize(kStateDim);
  s.q_diag << w.agent_q(), w.agent_q();
  s.terminal_scale = w.terminal_scale;
  s.r_grf = w.r_grf;
  s.r_lambda = w.r_lambda;
  s.friction = w.friction;
  s.fz_min = w.fz_min;

  // Deviation-form rows: e (x - x_op) + f (u - u_op) + g (lambda - lambda_op) + h = 0.
  const Eigen::VectorXd x_op = s.x0;
  const Eigen::VectorXd u_op = stack_grf(op.u);
  s.rows.resize(w.horizon);
  if (opt.holonomic != HolonomicRows::None) {
    const HolonomicRow acc = acceleration_row(eqc, opt.planning_baumgarte);
    for (int k = 0; k < w.horizon; ++k) {
      if (opt.holonomic == HolonomicRows::Full) {
        for (int r = 0; r < 2; ++r) {
          StepRow sr;
          sr.e_next = eqc.E.row(r);
          sr.rhs = eqc.E.row(r).dot(x_op) - eqc.h(r);
          s.rows[k].push_back(sr);
        }
      }
      StepRow sr;
      sr.e_cur = acc.e;
      sr.f = acc.f;
      sr.g = acc.g;
      sr.rhs = acc.e.dot(x_op) + acc.f.dot(u_op) + acc.g * op.lambda - acc.h;
      s.rows[k].push_back(sr);
    }
  }
  return build_mpc_qp(s);
}

PlannerOutput unpack_centralized(const QpSolution& sol, const LtvModel& ltv, int horizon) {
  PlannerOutput out;
  out.qp = sol;
  const int nu = static_cast<int>(ltv.B.cols());
  const int blk = kStateDim + nu + 1;
  for (int k = 0; k < horizon; ++k) {
    out.x.push_back(sol.z.segment<kStateDim>(k * blk));
    out.u.push_back(sol.z.segment(k * blk + kStateDim, nu));
    out.lambda.push_back(sol.z(k * blk + kStateDim + nu));
  }
  out.num_vars = static_cast<int>(sol.z.size());
  return out;
}

QpProblem build_nominal_qp(int agent, const OperatingPoint& op, const LtvModel& ltv,
                           const std::vector<LocalState>& xdes, const PlannerOptions& opt) {
  const MpcWeights& w = opt.weights;
  const int xo = agent_offset(agent);
  const int uo = ltv.grf_offset(agent);
  const int nu = ltv.grf_dims[agent];
  MpcQpSpec s;
  s.horizon = w.horizon;
  s.nx = kAgentStateDim;
  s.nu = nu;
  s.has_lambda = false;
  s.A = ltv.A.block(xo, xo, kAgentStateDim, kAgentStateDim);
  s.B = ltv.B.block(xo, uo, kAgentStateDim, nu);
  s.affine.assign(w.horizon, ltv.d.segment(xo, kAgentStateDim));
  s.x0 = to_local(op.x, op.x).segment(xo, kAgentStateDim);
  s.xdes = as_dynamic(xdes, xo, kAgentStateDim);
  s.q_diag = w.agent_q();
  s.terminal_scale = w.terminal_scale;
  s.r_grf = w.r_grf;
  s.friction = w.friction;
  s.fz_min = w.fz_min;
  return build_mpc_qp(s);
}

ControlCommand CentralizedPlanner::step(const PlanInput& in) {
  const MpcWeights& w = options_.weights;
  OperatingPoint op;
  op.x = in.x;
  op.feet = in.feet;
  op.u = hold_command(in, prev_feet_, prev_u_, params_);
  op.lambda = prev_lambda_;

  const LtvModel ltv = linearize_dynamics(op, params_, w.dt);
  const EqConstraintLin eqc = linearize_constraint(op, params_);
  const auto xdes = reference_trajectory(in.x, in.t, *in.command, w.horizon, w.dt, in.x);
  const QpProblem qp = build_centralized_qp(op, ltv, eqc, xdes, options_);
  const QpSolution sol = solve_qp(qp, options_.qp);

  ControlCommand cmd;
  cmd.status = sol.status;
  cmd.solve_ms = 1e3 * sol.solve_time;
  cmd.agent_solve_ms = {cmd.solve_ms, cmd.solve_ms};
  if (sol.ok()) {
    last_ = unpack_centralized(sol, ltv, w.horizon);
    last_.num_eq = qp.num_eq();
    last_.num_in = qp.num_in();
    cmd.u = split_grf(last_.u.front(), in.feet);
    cmd.lambda_hat = {last_.lambda.front(), last_.lambda.front()};
    prev_lambda_ = last_.lambda.front();
  } else {
    cmd.u = op.u;
    cmd.lambda_hat = {prev_lambda_, prev_lambda_};
    cmd.degraded = true;
  }
  prev_feet_ = in.feet;
  prev_u_ = cmd.u;
  return cmd;
}

ControlCommand NominalPlanner::step(const PlanInput& in) {
  const MpcWeights& w = options_.weights;
  OperatingPoint op;
  op.x = in.x;
  op.feet = in.feet;
  op.u = hold_command(in, prev_feet_, prev_u_, params_);
  op.lambda = 0.0;

  const LtvModel ltv = linearize_dynamics(op, params_, w.dt);
  const auto xdes = reference_trajectory(in.x, in.t, *in.command, w.horizon, w.dt, in.x);

  ControlCommand cmd;
  cmd.u = op.u;
  for (int i = 0; i < kNumAgents; ++i) {
    const QpSolution sol = solve_qp(build_nominal_qp(i, op, ltv, xdes, options_), options_.qp);
    cmd.agent_solve_ms[i] = 1e3 * sol.solve_time;
    if (sol.ok()) {
      const int blk = kAgentStateDim + ltv.grf_dims[i];
      cmd.u[i] = sol.z.segment(kAgentStateDim, blk - kAgentStateDim);
    } else {
      cmd.degraded = true;
      cmd.status = sol.status;
    }
  }
  cmd.solve_ms = std::max(cmd.agent_solve_ms[0], cmd.agent_solve_ms[1]);
  prev_feet_ = in.feet;
  prev_u_ = cmd.u;
  return cmd;
}

}  // namespace coop
