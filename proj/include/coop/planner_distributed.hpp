#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "coop/mpc_common.hpp"

namespace coop {

struct AgreementConfig {
  double weight = 10.0;
  double a_self = 0.5;
  double a_other = 0.5;
};

/// How the neighbor's contribution to the holonomic row is estimated:
///  InputF:   E_j dx_j + F_j du_j (dimensionally consistent reading)
///  PrintedG: E_j dx_j + G (lambda_j - lambda_op)
enum class OmegaVariant { InputF, PrintedG };

struct DistributedOptions {
  AgreementConfig agreement;
  OmegaVariant omega = OmegaVariant::InputF;
};

/// What agent j posts after solving at `tick`; consumed by agent i at tick + 1.
struct NeighborMessage {
  long tick = -1;                     // -1 marks "no information" (bootstrap)
  int agent = 0;
  Mat3 chart_rotation = Mat3::Identity();  // chart of the local x
  std::vector<AgentLocalState> x;     // x*_{k+1}, k = 0..N-1
  std::vector<Leg> stance;            // legs of the u blocks
  std::vector<Eigen::VectorXd> u;     // u*_k, k = 0..N-1
  std::vector<double> lambda;         // lambda*_k
  Eigen::VectorXd beta;               // duals of the 12N local dynamics rows

  bool valid() const { return tick >= 0; }
  nlohmann::json to_json() const;
};

/// Neighbor data re-indexed to the consumer's horizon (index k is time t + k)
/// and re-expressed in the current chart.
struct NeighborTrajectory {
  bool valid = false;
  std::vector<AgentLocalState> x;   // x*_{j,k}
  std::vector<Eigen::VectorXd> u;   // u*_{j,k}, matched to the current stance
  std::vector<bool> u_zeroed;       // the final-step entry is not planned
  std::vector<double> lambda;       // lambda*_{j,k}
  Eigen::VectorXd beta;             // 12N
};

NeighborTrajectory align_message(const NeighborMessage& msg, const OperatingPoint& op,
                                 int horizon);

/// Delta_{i,k} = A_ij x*_{j,k} + B_ij u*_{j,k};  Omega_{i,k} = neighbor part of the psi_ddot row.
struct InteractionEstimate {
  std::vector<Eigen::VectorXd> delta;  // 12 each
  std::vector<double> omega;
};

InteractionEstimate estimate_interaction(int agent, const OperatingPoint& op, const LtvModel& ltv,
                                         const HolonomicRow& row, const NeighborTrajectory& nbr,
                                         int horizon, OmegaVariant variant = OmegaVariant::InputF);

/// K_ji maps agent i's stacked (x_{i,k+1}, u_{i,k}) blocks to agent j's stacked
/// Delta_j; K_jl stacks C_j against lambda(.).
struct Sensitivity {
  Eigen::MatrixXd K_state;   // 12N x (12 + 3 m_i) N
  Eigen::MatrixXd K_lambda;  // 12N x N
};

Sensitivity sensitivity_matrices(int agent, const LtvModel& ltv, int horizon);

struct LocalQpInputs {
  NeighborTrajectory neighbor;
  std::vector<double> own_lambda;  // lambda*_{i,k} from the previous own solve
};

/// Local QP of agent i with (13 + 1.5 m_u) N variables: blocks (x_{i,k+1}, u_{i,k}, lambda_{i,k}).
QpProblem build_local_qp(int agent, const OperatingPoint& op, const LtvModel& ltv,
                         const EqConstraintLin& eqc, const std::vector<LocalState>& xdes,
                         const LocalQpInputs& in, const PlannerOptions& opt,
                         const DistributedOptions& dopt);

class DistributedPlanner : public Planner {
 public:
  DistributedPlanner(const ModelParams& params, const PlannerOptions& options,
                     const AgreementConfig& agreement)
      : params_(params), options_(options) {
    dopt_.agreement = agreement;
  }
  DistributedPlanner(const ModelParams& params, const PlannerOptions& options,
                     const DistributedOptions& dopt)
      : params_(params), options_(options), dopt_(dopt) {}

  std::string name() const override { return "distributed"; }
  ControlCommand step(const PlanInput& in) override;

  /// Messages posted at the last tick (index = sender).
  const std::array<NeighborMessage, kNumAgents>& outbox() const { return outbox_; }
  int local_num_vars(int agent) const { return last_num_vars_[agent]; }

 private:
  ModelParams params_;
  PlannerOptions options_;
  DistributedOptions dopt_;
  std::array<NeighborMessage, kNumAgents> outbox_{};
  std::array<int, kNumAgents> last_num_vars_{};
  std::optional<FootholdSet> prev_feet_;
  std::optional<GrfInput> prev_u_;
  std::array<double, kNumAgents> prev_lambda_hat_{};
};

}  // namespace coop
