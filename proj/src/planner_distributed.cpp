#include "coop/planner_distributed.hpp"

#include <stdexcept>

#include "coop/planner_centralized.hpp"

namespace coop {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Leg-matched copy of a previous GRF block onto the current stance; legs that
// were not planned keep the operating-point value.
Eigen::VectorXd match_legs(const Eigen::VectorXd& u_prev, const std::vector<Leg>& prev_legs,
                           const std::vector<Leg>& legs, const Eigen::VectorXd& u_op) {
  Eigen::VectorXd out = u_op;
  for (size_t k = 0; k < legs.size(); ++k) {
    for (size_t m = 0; m < prev_legs.size(); ++m) {
      if (prev_legs[m] == legs[k]) out.segment<3>(3 * k) = u_prev.segment<3>(3 * m);
    }
  }
  return out;
}

}  // namespace

nlohmann::json NeighborMessage::to_json() const {
  nlohmann::json j;
  j["tick"] = tick;
  j["agent"] = agent + 1;
  nlohmann::json xs = nlohmann::json::array();
  for (const auto& v : x) xs.push_back(to_std(v));
  j["x"] = xs;
  nlohmann::json legs = nlohmann::json::array();
  for (Leg l : stance) legs.push_back(leg_name(l));
  j["stance"] = legs;
  nlohmann::json us = nlohmann::json::array();
  for (const auto& v : u) us.push_back(to_std(v));
  j["u"] = us;
  j["lambda"] = lambda;
  j["beta"] = to_std(beta);
  return j;
}

NeighborTrajectory align_message(const NeighborMessage& msg, const OperatingPoint& op,
                                 int horizon) {
  NeighborTrajectory out;
  if (!msg.valid()) return out;
  const int N = horizon;
  if (static_cast<int>(msg.x.size()) != N || static_cast<int>(msg.u.size()) != N ||
      static_cast<int>(msg.lambda.size()) != N || msg.beta.size() != kAgentStateDim * N) {
    throw std::invalid_argument("align_message: horizon mismatch");
  }
  const int j = msg.agent;
  const Mat3& chart = op.x.agents[j].rotation;
  const std::vector<Leg> legs = op.feet[j].stance_legs();
  out.valid = true;
  out.beta = Eigen::VectorXd::Zero(kAgentStateDim * N);
  for (int k = 0; k < N; ++k) {
    AgentLocalState x = msg.x[k];
    const Mat3 r = msg.chart_rotation * so3::exp(x.segment<3>(kRot));
    x.segment<3>(kRot) = so3::log(chart.transpose() * r);
    out.x.push_back(x);
    if (k + 1 < N) {
      out.u.push_back(match_legs(msg.u[k + 1], msg.stance, legs, op.u[j]));
      out.u_zeroed.push_back(false);
      out.lambda.push_back(msg.lambda[k + 1]);
      out.beta.segment<kAgentStateDim>(kAgentStateDim * k) =
          msg.beta.segment<kAgentStateDim>(kAgentStateDim * (k + 1));
    } else {
      out.u.push_back(Eigen::VectorXd::Zero(op.u[j].size()));
      out.u_zeroed.push_back(true);
      out.lambda.push_back(msg.lambda[N - 1]);
    }
  }
  return out;
}

InteractionEstimate estimate_interaction(int i, const OperatingPoint& op, const LtvModel& ltv,
                                         const HolonomicRow& row, const NeighborTrajectory& nbr,
                                         int N, OmegaVariant variant) {
  InteractionEstimate est;
  est.delta.assign(N, Eigen::VectorXd::Zero(kAgentStateDim));
  est.omega.assign(N, 0.0);
  if (!nbr.valid) return est;
  const int j = 1 - i;
  const int nuj = ltv.grf_dims[j];
  const auto A_ij = ltv.A.block(agent_offset(i), agent_offset(j), kAgentStateDim, kAgentStateDim);
  const auto B_ij = ltv.B.block(agent_offset(i), ltv.grf_offset(j), kAgentStateDim, nuj);
  const AgentLocalState x_op_j = to_local(op.x, op.x).segment<kAgentStateDim>(agent_offset(j));
  const Eigen::RowVectorXd e_j = row.e.segment(agent_offset(j), kAgentStateDim);
  const Eigen::RowVectorXd f_j = row.f.segment(ltv.grf_offset(j), nuj);
  for (int k = 0; k < N; ++k) {
    est.delta[k] = A_ij * nbr.x[k] + B_ij * nbr.u[k];
    double om = e_j.dot(nbr.x[k] - x_op_j);
    if (variant == OmegaVariant::InputF) {
      if (!nbr.u_zeroed[k]) om += f_j.dot(nbr.u[k] - op.u[j]);
    } else {
      om += row.g * (nbr.lambda[k] - op.lambda);
    }
    est.omega[k] = om;
  }
  return est;
}

Sensitivity sensitivity_matrices(int i, const LtvModel& ltv, int N) {
  const int j = 1 - i;
  const int nui = ltv.grf_dims[i];
  const int blk = kAgentStateDim + nui;
  const auto A_ji = ltv.A.block(agent_offset(j), agent_offset(i), kAgentStateDim, kAgentStateDim);
  const auto B_ji = ltv.B.block(agent_offset(j), ltv.grf_offset(i), kAgentStateDim, nui);
  const auto C_j = ltv.C.segment(agent_offset(j), kAgentStateDim);
  Sensitivity s;
  s.K_state = Eigen::MatrixXd::Zero(kAgentStateDim * N, blk * N);
  s.K_lambda = Eigen::MatrixXd::Zero(kAgentStateDim * N, N);
  for (int k = 0; k < N; ++k) {
    const int r = kAgentStateDim * k;
    if (k >= 1) s.K_state.block(r, (k - 1) * blk, kAgentStateDim, kAgentStateDim) = A_ji;
    s.K_state.block(r, k * blk + kAgentStateDim, kAgentStateDim, nui) = B_ji;
    s.K_lambda.block(r, k, kAgentStateDim, 1) = C_j;
  }
  return s;
}

QpProblem build_local_qp(int i, const OperatingPoint& op, const LtvModel& ltv,
                         const EqConstraintLin& eqc, const std::vector<LocalState>& xdes,
                         const LocalQpInputs& in, const PlannerOptions& opt,
                         const DistributedOptions& dopt) {
  const MpcWeights& w = opt.weights;
  const int N = w.horizon;
  const int j = 1 - i;
  const int xo = agent_offset(i);
  const int nui = ltv.grf_dims[i];
  if (static_cast<int>(xdes.size()) != N) throw std::invalid_argument("build_local_qp: horizon");

  const HolonomicRow row = acceleration_row(eqc, opt.planning_baumgarte);
  const InteractionEstimate est =
      estimate_interaction(i, op, ltv, row, in.neighbor, N, dopt.omega);

  MpcQpSpec s;
  s.horizon = N;
  s.nx = kAgentStateDim;
  s.nu = nui;
  s.has_lambda = true;
  s.A = ltv.A.block(xo, xo, kAgentStateDim, kAgentStateDim);
  s.B = ltv.B.block(xo, ltv.grf_offset(i), kAgentStateDim, nui);
  s.C = ltv.C.segment(xo, kAgentStateDim);
  const Eigen::VectorXd d_i = ltv.d.segment(xo, kAgentStateDim);
  for (int k = 0; k < N; ++k) s.affine.push_back(d_i + est.delta[k]);
  const LocalState x_op = to_local(op.x, op.x);
  s.x0 = x_op.segment(xo, kAgentStateDim);
  for (const auto& xd : xdes) s.xdes.emplace_back(xd.segment(xo, kAgentStateDim));
  s.q_diag = w.agent_q();
  s.terminal_scale = w.terminal_scale;
  s.r_grf = w.r_grf;
  s.r_lambda = w.r_lambda;
  s.friction = w.friction;
  s.fz_min = w.fz_min;

  const Eigen::RowVectorXd e_i = row.e.segment(xo, kAgentStateDim);
  const Eigen::RowVectorXd f_i = row.f.segment(ltv.grf_offset(i), nui);
  const Eigen::VectorXd u_op_i = op.u[i];
  s.rows.resize(N);
  if (opt.holonomic != HolonomicRows::None) {
    for (int k = 0; k < N; ++k) {
      if (opt.holonomic == HolonomicRows::Full) {
        for (int r = 0; r < 2; ++r) {
          StepRow sr;
          sr.e_next = eqc.E.row(r).segment(xo, kAgentStateDim);
          double om = 0.0;
          if (in.neighbor.valid) {
            const int kn = std::min(k + 1, N - 1);
            om = eqc.E.row(r).segment(agent_offset(j), kAgentStateDim)
                     .dot(in.neighbor.x[kn] - x_op.segment(agent_offset(j), kAgentStateDim));
          }
          sr.rhs = sr.e_next.dot(s.x0) - eqc.h(r) - om;
          s.rows[k].push_back(sr);
        }
      }
      StepRow sr;
      sr.e_cur = e_i;
      sr.f = f_i;
      sr.g = row.g;
      sr.rhs = e_i.dot(s.x0) + f_i.dot(u_op_i) + row.g * op.lambda - row.h - est.omega[k];
      s.rows[k].push_back(sr);
    }
  }

  // Sensitivity terms beta*' K_ji z_i and beta*' K_jl lambda_i.
  s.linear_cost = Eigen::VectorXd::Zero(s.num_vars());
  if (in.neighbor.valid) {
    const Sensitivity sens = sensitivity_matrices(i, ltv, N);
    const Eigen::VectorXd gs = sens.K_state.transpose() * in.neighbor.beta;
    const Eigen::VectorXd gl = sens.K_lambda.transpose() * in.neighbor.beta;
    const int blk = kAgentStateDim + nui;
    for (int k = 0; k < N; ++k) {
      s.linear_cost.segment(k * s.block(), blk) = gs.segment(k * blk, blk);
      s.linear_cost(s.lambda_col(k)) = gl(k);
    }
  }

  // Agreement on lambda.
  const AgreementConfig& ag = dopt.agreement;
  if (ag.weight > 0.0) {
    s.lambda_track_weight = ag.weight;
    s.lambda_target.assign(N, 0.0);
    for (int k = 0; k < N; ++k) {
      const double own = k < static_cast<int>(in.own_lambda.size()) ? in.own_lambda[k] : 0.0;
      const double other = in.neighbor.valid ? in.neighbor.lambda[k] : 0.0;
      s.lambda_target[k] = ag.a_self * own + ag.a_other * other;
    }
  }
  return build_mpc_qp(s);
}

ControlCommand DistributedPlanner::step(const PlanInput& in) {
  const MpcWeights& w = options_.weights;
  const int N = w.horizon;
  OperatingPoint op;
  op.x = in.x;
  op.feet = in.feet;
  op.u = operating_grf(in.feet, prev_feet_ ? &*prev_feet_ : nullptr,
                       prev_u_ ? &*prev_u_ : nullptr, params_);
  op.lambda = 0.5 * (prev_lambda_hat_[0] + prev_lambda_hat_[1]);

  const LtvModel ltv = linearize_dynamics(op, params_, w.dt);
  const EqConstraintLin eqc = linearize_constraint(op, params_);
  const auto xdes = reference_trajectory(in.x, in.t, *in.command, N, w.dt, in.x);

  for (const auto& m : outbox_) {
    if (m.valid() && m.tick != in.tick - 1) {
      throw std::logic_error("distributed planner: message is not from the previous tick");
    }
  }

  ControlCommand cmd;
  cmd.u = op.u;
  cmd.lambda_hat = prev_lambda_hat_;
  std::array<NeighborMessage, kNumAgents> posted{};
  for (int i = 0; i < kNumAgents; ++i) {
    const int j = 1 - i;
    LocalQpInputs li;
    li.neighbor = align_message(outbox_[j], op, N);
    if (outbox_[i].valid()) li.own_lambda = align_message(outbox_[i], op, N).lambda;
    const QpProblem qp = build_local_qp(i, op, ltv, eqc, xdes, li, options_, dopt_);
    const QpSolution sol = solve_qp(qp, options_.qp);
    last_num_vars_[i] = qp.num_vars();
    cmd.agent_solve_ms[i] = 1e3 * sol.solve_time;
    if (!sol.ok()) {
      cmd.degraded = true;
      cmd.status = sol.status;
      continue;
    }
    const int nui = ltv.grf_dims[i];
    const int blk = kAgentStateDim + nui + 1;
    NeighborMessage& m = posted[i];
    m.tick = in.tick;
    m.agent = i;
    m.chart_rotation = in.x.agents[i].rotation;
    m.stance = in.feet[i].stance_legs();
    for (int k = 0; k < N; ++k) {
      m.x.push_back(sol.z.segment<kAgentStateDim>(k * blk));
      m.u.push_back(sol.z.segment(k * blk + kAgentStateDim, nui));
      m.lambda.push_back(sol.z(k * blk + kAgentStateDim + nui));
    }
    m.beta = sol.eq_duals.head(kAgentStateDim * N);
    cmd.u[i] = m.u.front();
    cmd.lambda_hat[i] = m.lambda.front();
  }
  cmd.solve_ms = std::max(cmd.agent_solve_ms[0], cmd.agent_solve_ms[1]);
  outbox_ = posted;
  prev_feet_ = in.feet;
  prev_u_ = cmd.u;
  prev_lambda_hat_ = cmd.lambda_hat;
  return cmd;
}

}  // namespace coop
