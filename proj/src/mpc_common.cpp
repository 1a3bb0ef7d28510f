#include "coop/mpc_common.hpp"

#include <cmath>
#include <stdexcept>

#include "coop/planner_centralized.hpp"
#include "coop/planner_distributed.hpp"

namespace coop {

Eigen::Matrix<double, kAgentStateDim, 1> MpcWeights::agent_q() const {
  Eigen::Matrix<double, kAgentStateDim, 1> q;
  q.segment<3>(kPos) = q_position;
  q.segment<3>(kVel).setConstant(q_velocity);
  q.segment<3>(kRot).setConstant(q_rotation);
  q.segment<3>(kOmega).setConstant(q_omega);
  return q;
}

void append_friction_cone(std::vector<Eigen::Triplet<double>>& trip, std::vector<double>& rhs,
                          int& row, int col, double mu, double fz_min) {
  const double c = mu / std::sqrt(2.0);
  trip.emplace_back(row, col + 2, -1.0);
  rhs.push_back(-fz_min);
  ++row;
  for (int axis = 0; axis < 2; ++axis) {
    for (double sign : {1.0, -1.0}) {
      trip.emplace_back(row, col + axis, sign);
      trip.emplace_back(row, col + 2, -c);
      rhs.push_back(0.0);
      ++row;
    }
  }
}

HolonomicRow acceleration_row(const EqConstraintLin& c, double a) {
  HolonomicRow r;
  r.e = c.E.row(2) + 2.0 * a * c.E.row(1) + a * a * c.E.row(0);
  r.f = c.F.row(2);
  r.g = c.G(2);
  r.h = c.h(2) + 2.0 * a * c.h(1) + a * a * c.h(0);
  return r;
}

GrfInput operating_grf(const FootholdSet& feet, const FootholdSet* prev_feet,
                       const GrfInput* prev_u, const ModelParams& params) {
  GrfInput u;
  for (int i = 0; i < kNumAgents; ++i) {
    const auto legs = feet[i].stance_legs();
    u[i] = Eigen::VectorXd::Zero(3 * legs.size());
    const double share = legs.empty() ? 0.0
                                      : params.agents[i].mass * params.gravity /
                                            static_cast<double>(legs.size());
    for (size_t k = 0; k < legs.size(); ++k) {
      u[i].segment<3>(3 * k) = Vec3(0.0, 0.0, share);
      if (prev_feet && prev_u) {
        const auto prev_legs = (*prev_feet)[i].stance_legs();
        for (size_t m = 0; m < prev_legs.size(); ++m) {
          if (prev_legs[m] == legs[k] && (*prev_u)[i].size() == 3 * static_cast<int>(prev_legs.size())) {
            u[i].segment<3>(3 * k) = (*prev_u)[i].segment<3>(3 * m);
          }
        }
      }
    }
  }
  return u;
}

const char* to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::Nominal: return "nominal";
    case PlannerKind::Centralized: return "centralized";
    case PlannerKind::Distributed: return "distributed";
  }
  return "?";
}

PlannerKind planner_kind_from_string(const std::string& s) {
  if (s == "nominal") return PlannerKind::Nominal;
  if (s == "centralized") return PlannerKind::Centralized;
  if (s == "distributed") return PlannerKind::Distributed;
  throw std::invalid_argument("unknown planner: " + s);
}

std::unique_ptr<Planner> make_planner(PlannerKind kind, const ModelParams& params,
                                      const PlannerOptions& options) {
  switch (kind) {
    case PlannerKind::Nominal: return std::make_unique<NominalPlanner>(params, options);
    case PlannerKind::Centralized: return std::make_unique<CentralizedPlanner>(params, options);
    case PlannerKind::Distributed:
      return std::make_unique<DistributedPlanner>(params, options, AgreementConfig{});
  }
  throw std::invalid_argument("make_planner: unknown kind");
}

}  // namespace coop

namespace coop {

QpProblem build_mpc_qp(const MpcQpSpec& s) {
  const int N = s.horizon;
  const int n = s.num_vars();
  if (s.A.rows() != s.nx || s.A.cols() != s.nx || s.B.rows() != s.nx || s.B.cols() != s.nu ||
      static_cast<int>(s.affine.size()) != N || static_cast<int>(s.xdes.size()) != N ||
      s.x0.size() != s.nx || s.q_diag.size() != s.nx || (s.has_lambda && s.C.size() != s.nx) ||
      s.nu % 3 != 0) {
    throw std::invalid_argument("build_mpc_qp: dimension mismatch");
  }
  QpProblem p;

  // Cost.
  std::vector<Eigen::Triplet<double>> ht;
  p.g = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < N; ++k) {
    const double scale = (k + 1 == N) ? s.terminal_scale : 1.0;
    const int xc = s.x_col(k + 1);
    for (int r = 0; r < s.nx; ++r) {
      const double q = scale * s.q_diag(r);
      ht.emplace_back(xc + r, xc + r, 2.0 * q);
      p.g(xc + r) = -2.0 * q * s.xdes[k](r);
    }
    for (int r = 0; r < s.nu; ++r) ht.emplace_back(s.u_col(k) + r, s.u_col(k) + r, 2.0 * s.r_grf);
    if (s.has_lambda) {
      double h = 2.0 * s.r_lambda;
      if (s.lambda_track_weight > 0.0) {
        h += 2.0 * s.lambda_track_weight;
        p.g(s.lambda_col(k)) -= 2.0 * s.lambda_track_weight * s.lambda_target.at(k);
      }
      ht.emplace_back(s.lambda_col(k), s.lambda_col(k), h);
    }
  }
  if (s.linear_cost.size() > 0) {
    if (s.linear_cost.size() != n) throw std::invalid_argument("build_mpc_qp: linear cost size");
    p.g += s.linear_cost;
  }
  p.H.resize(n, n);
  p.H.setFromTriplets(ht.begin(), ht.end());

  // Equalities: dynamics then extra rows, step by step.
  std::vector<Eigen::Triplet<double>> et;
  std::vector<double> eb;
  int row = 0;
  for (int k = 0; k < N; ++k) {
    Eigen::VectorXd rhs = -s.affine[k];
    if (k == 0) {
      rhs -= s.A * s.x0;
    } else {
      const int xc = s.x_col(k);
      for (int r = 0; r < s.nx; ++r) {
        for (int c = 0; c < s.nx; ++c) {
          if (s.A(r, c) != 0.0) et.emplace_back(row + r, xc + c, s.A(r, c));
        }
      }
    }
    for (int r = 0; r < s.nx; ++r) {
      for (int c = 0; c < s.nu; ++c) {
        if (s.B(r, c) != 0.0) et.emplace_back(row + r, s.u_col(k) + c, s.B(r, c));
      }
      if (s.has_lambda && s.C(r) != 0.0) et.emplace_back(row + r, s.lambda_col(k), s.C(r));
      et.emplace_back(row + r, s.x_col(k + 1) + r, -1.0);
      eb.push_back(rhs(r));
    }
    row += s.nx;
  }
  for (int k = 0; k < N && k < static_cast<int>(s.rows.size()); ++k) {
    for (const StepRow& sr : s.rows[k]) {
      double rhs = sr.rhs;
      if (sr.e_cur.size() > 0) {
        if (k == 0) {
          rhs -= sr.e_cur.dot(s.x0);
        } else {
          for (int c = 0; c < s.nx; ++c) {
            if (sr.e_cur(c) != 0.0) et.emplace_back(row, s.x_col(k) + c, sr.e_cur(c));
          }
        }
      }
      if (sr.e_next.size() > 0) {
        for (int c = 0; c < s.nx; ++c) {
          if (sr.e_next(c) != 0.0) et.emplace_back(row, s.x_col(k + 1) + c, sr.e_next(c));
        }
      }
      if (sr.f.size() > 0) {
        for (int c = 0; c < s.nu; ++c) {
          if (sr.f(c) != 0.0) et.emplace_back(row, s.u_col(k) + c, sr.f(c));
        }
      }
      if (s.has_lambda && sr.g != 0.0) et.emplace_back(row, s.lambda_col(k), sr.g);
      eb.push_back(rhs);
      ++row;
    }
  }
  p.A_eq.resize(row, n);
  p.A_eq.setFromTriplets(et.begin(), et.end());
  p.b_eq = Eigen::Map<Eigen::VectorXd>(eb.data(), static_cast<int>(eb.size()));

  // Friction cones on every stance foot.
  std::vector<Eigen::Triplet<double>> it;
  std::vector<double> ib;
  int irow = 0;
  for (int k = 0; k < N; ++k) {
    for (int f = 0; f < s.nu / 3; ++f) {
      append_friction_cone(it, ib, irow, s.u_col(k) + 3 * f, s.friction, s.fz_min);
    }
  }
  p.A_in.resize(irow, n);
  p.A_in.setFromTriplets(it.begin(), it.end());
  p.b_in = Eigen::Map<Eigen::VectorXd>(ib.data(), static_cast<int>(ib.size()));
  return p;
}

}  // namespace coop
