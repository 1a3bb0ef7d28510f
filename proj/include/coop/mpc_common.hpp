#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "coop/gait.hpp"
#include "coop/linearizer.hpp"
#include "coop/qp.hpp"

namespace coop {

struct MpcWeights {
  Vec3 q_position = 1e5 * Vec3(3.0, 300.0, 30.0);
  double q_velocity = 1e4;
  double q_rotation = 1e8;
  double q_omega = 5e3;
  double terminal_scale = 0.1;  // P = terminal_scale * Q
  double r_grf = 1e-2;
  double r_lambda = 1e4;
  int horizon = 5;
  double dt = 0.005;        // s
  double friction = 0.6;
  double fz_min = 1.0;      // N

  /// Diagonal of one agent's 12 x 12 state weight.
  Eigen::Matrix<double, kAgentStateDim, 1> agent_q() const;
};

/// Which linearized holonomic rows enter the planning QP.
///  Acceleration: one psi_ddot row per step on (x_k, u_k, lambda_k).
///  Full: additionally psi and psi_dot rows on x_{k+1} (3 rows per step).
///  None: no holonomic rows (used for structural comparisons).
enum class HolonomicRows { Acceleration, Full, None };

struct PlannerOptions {
  MpcWeights weights;
  HolonomicRows holonomic = HolonomicRows::Acceleration;
  /// Baumgarte rate on the planning constraint row (0: exact psi_ddot row).
  double planning_baumgarte = 0.0;
  QpSettings qp;
};

/// Friction-cone rows of one foot: -u_z <= -fz_min, |u_x|, |u_y| <= (mu / sqrt 2) u_z.
inline constexpr int kConeRowsPerFoot = 5;
void append_friction_cone(std::vector<Eigen::Triplet<double>>& trip, std::vector<double>& rhs,
                          int& row, int col, double mu, double fz_min);

/// Coefficients of the psi_ddot row with optional Baumgarte terms folded in.
struct HolonomicRow {
  Eigen::Matrix<double, 1, kStateDim> e;
  Eigen::RowVectorXd f;
  double g = 0.0;
  double h = 0.0;
};
HolonomicRow acceleration_row(const EqConstraintLin& c, double alpha);

/// Per-tick planner input shared by all planners.
struct PlanInput {
  long tick = 0;
  double t = 0.0;
  CoupledState x;
  FootholdSet feet;
  const CommandProfile* command = nullptr;
};

struct ControlCommand {
  GrfInput u;                            // first-step GRFs per agent
  std::array<double, kNumAgents> lambda_hat{};
  bool degraded = false;
  QpStatus status = QpStatus::Optimal;
  double solve_ms = 0.0;  // critical-path QP time (max over parallel solves)
  std::array<double, kNumAgents> agent_solve_ms{};
};

/// Full optimal trajectories of a planning QP.
struct PlannerOutput {
  QpSolution qp;
  std::vector<LocalState> x;          // x_{1..N}
  std::vector<Eigen::VectorXd> u;     // u_{0..N-1}, stacked agent 1 then 2
  std::vector<double> lambda;         // lambda_{0..N-1}
  int num_vars = 0;
  int num_eq = 0;
  int num_in = 0;
};

/// Operating-point GRFs for the current stance set: the previous command for
/// legs that stayed in stance, an equal share of the weight otherwise.
GrfInput operating_grf(const FootholdSet& feet, const FootholdSet* prev_feet,
                       const GrfInput* prev_u, const ModelParams& params);

class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::string name() const = 0;
  virtual ControlCommand step(const PlanInput& in) = 0;
};

enum class PlannerKind { Nominal, Centralized, Distributed };
const char* to_string(PlannerKind k);
PlannerKind planner_kind_from_string(const std::string& s);

std::unique_ptr<Planner> make_planner(PlannerKind kind, const ModelParams& params,
                                      const PlannerOptions& options);

}  // namespace coop

namespace coop {

/// One linear equality row of the planning QP at step k:
///   e_cur x_k + e_next x_{k+1} + f u_k + g lambda_k = rhs.
struct StepRow {
  Eigen::RowVectorXd e_cur;   // empty: no x_k term
  Eigen::RowVectorXd e_next;  // empty: no x_{k+1} term
  Eigen::RowVectorXd f;       // empty: no u_k term
  double g = 0.0;
  double rhs = 0.0;
};

/// Generic horizon-N MPC QP with per-step variable blocks (x_{k+1}, u_k, [lambda_k]).
/// Dynamics: x_{k+1} = A x_k + B u_k + C lambda_k + c_k, x_0 fixed.
struct MpcQpSpec {
  int horizon = 5;
  int nx = 0;
  int nu = 0;
  bool has_lambda = false;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd C;
  std::vector<Eigen::VectorXd> affine;  // c_k, k = 0..N-1
  Eigen::VectorXd x0;
  std::vector<Eigen::VectorXd> xdes;    // k = 1..N
  Eigen::VectorXd q_diag;
  double terminal_scale = 0.1;
  double r_grf = 1e-2;
  double r_lambda = 1e4;
  std::vector<std::vector<StepRow>> rows;  // per step, after the dynamics rows
  Eigen::VectorXd linear_cost;             // optional, size num_vars
  std::vector<double> lambda_target;       // optional agreement targets
  double lambda_track_weight = 0.0;
  double friction = 0.6;
  double fz_min = 1.0;

  int block() const { return nx + nu + (has_lambda ? 1 : 0); }
  int num_vars() const { return horizon * block(); }
  int x_col(int k) const { return (k - 1) * block(); }  // x_k, k >= 1
  int u_col(int k) const { return k * block() + nx; }
  int lambda_col(int k) const { return k * block() + nx + nu; }
};

QpProblem build_mpc_qp(const MpcQpSpec& spec);

}  // namespace coop
