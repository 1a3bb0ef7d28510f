#pragma once

#include <optional>

#include "coop/mpc_common.hpp"

namespace coop {

/// Centralized QP over (x(.), u(.), lambda(.)) of both agents; (25 + 3 m_u) N variables.
QpProblem build_centralized_qp(const OperatingPoint& op, const LtvModel& ltv,
                               const EqConstraintLin& eqc, const std::vector<LocalState>& xdes,
                               const PlannerOptions& opt);

PlannerOutput unpack_centralized(const QpSolution& sol, const LtvModel& ltv, int horizon);

/// Single-agent SRB QP built from the diagonal blocks of a linearization taken
/// with lambda_op = 0 (no bar force, no holonomic rows); (12 + 3 m_i) N variables.
QpProblem build_nominal_qp(int agent, const OperatingPoint& op, const LtvModel& ltv,
                           const std::vector<LocalState>& xdes, const PlannerOptions& opt);

/// Agent block of a 24-vector / matrix.
inline int agent_offset(int agent) { return kAgentStateDim * agent; }

class CentralizedPlanner : public Planner {
 public:
  CentralizedPlanner(const ModelParams& params, const PlannerOptions& options)
      : params_(params), options_(options) {}

  std::string name() const override { return "centralized"; }
  ControlCommand step(const PlanInput& in) override;

  const PlannerOutput& last_output() const { return last_; }

 private:
  ModelParams params_;
  PlannerOptions options_;
  PlannerOutput last_;
  std::optional<FootholdSet> prev_feet_;
  std::optional<GrfInput> prev_u_;
  double prev_lambda_ = 0.0;
};

class NominalPlanner : public Planner {
 public:
  NominalPlanner(const ModelParams& params, const PlannerOptions& options)
      : params_(params), options_(options) {}

  std::string name() const override { return "nominal"; }
  ControlCommand step(const PlanInput& in) override;

 private:
  ModelParams params_;
  PlannerOptions options_;
  std::optional<FootholdSet> prev_feet_;
  std::optional<GrfInput> prev_u_;
};

}  // namespace coop
