#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coop/gait.hpp"
#include "coop/mpc_common.hpp"

namespace coop {

/// Per-axis sinusoidal world-frame force at each agent's COM.
struct DisturbanceSpec {
  std::array<Vec3, kNumAgents> amplitude{};                 // N
  std::array<Vec3, kNumAgents> period{Vec3::Ones(), Vec3::Ones()};  // s
  double start = 1.0;   // s
  double stop = 60.0;   // s

  Vec3 force(int agent, double t) const;
};

/// Heightmap of square cells with i.i.d. U[0, max_height] heights drawn from the seed.
struct TerrainSpec {
  double max_height = 0.0;  // m
  double cell_size = 0.1;   // m
  double run_length = 10.0; // m; reaching it ends the trial as a success
  std::uint64_t seed = 0;

  double height(double x, double y) const;
};

/// SplitMix64 finalizer; the seed mixer used for terrain and trial seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Linear-interpolated q-quantile (q in [0, 1]); 0 for an empty sample.
double percentile(std::vector<double> v, double q);

enum class FailureCause { None, TipOver, HeightCollapse, Solver, Internal };
const char* to_string(FailureCause c);

struct ScenarioConfig {
  double duration = 10.0;  // s
  CommandProfile command = CommandProfile::constant(0.5);
  double payload_mass = 0.0;  // kg, carried at the bar midpoint
  std::optional<DisturbanceSpec> disturbance;
  std::optional<TerrainSpec> terrain;
  double friction = 0.6;
  PlannerKind planner = PlannerKind::Centralized;
  std::uint64_t seed = 0;
  GaitConfig gait;
  double initial_perturbation = 1.0;  // scale of the seeded initial-state noise
  double baumgarte = 20.0;            // 1/s, ground-truth constraint stabilization
  double physics_dt = 0.001;          // s
  bool keep_logs = true;
};

struct FailureThresholds {
  double max_tilt = 0.6;       // rad, |roll| or |pitch|
  double min_height = 0.12;    // m
  int max_degraded_ticks = 3;
};

/// One control-rate sample.
struct LogRow {
  double t = 0.0;
  std::array<AgentState, kNumAgents> state{};
  std::array<std::array<Vec3, kLegsPerAgent>, kNumAgents> grf{};  // zero in swing
  std::array<double, kNumAgents> lambda_hat{};
  double lambda_true = 0.0;
  double psi_err = 0.0;
  double solve_ms = 0.0;
  std::array<double, kNumAgents> agent_solve_ms{};
};

struct TrialMetrics {
  double distance = 0.0;           // m, mean forward progress of the agents
  double max_psi_err = 0.0;        // max |psi - psi0| over all physics steps
  double speed_error = 0.0;        // mean | |v_xy| - |v_cmd| | after the transient
  double velocity_error = 0.0;     // mean ||v_xy - v_cmd|| after the transient
  double lambda_gap = 0.0;         // mean |lambda_hat_1 - lambda_hat_2| after the transient
  double lambda_mean_abs = 0.0;    // mean |lambda_hat| after the transient
  double mean_stance_fz = 0.0;     // mean vertical GRF per stance leg after the transient
  double median_solve_ms = 0.0;
  double p95_solve_ms = 0.0;
  int degraded_ticks = 0;
};

struct TrialResult {
  bool success = false;
  FailureCause cause = FailureCause::None;
  double failure_time = 0.0;  // s
  double end_time = 0.0;      // s
  TrialMetrics metrics;
  std::vector<LogRow> logs;
  std::vector<double> solve_ms;
};

struct SimSettings {
  ModelParams model;
  PlannerOptions planner;
  FailureThresholds thresholds;
  double transient = 2.0;  // s excluded from tracking metrics
};

/// Standing formation: agents side by side 1 m apart (agent 1 at +y), walking +x.
CoupledState initial_state(const ModelParams& params, const ScenarioConfig& sc);

/// Ground-truth loads (disturbance at the COM, payload share at the interaction point).
ExternalLoads external_loads(const ScenarioConfig& sc, const ModelParams& params, double t);

/// One RK4 step of the constrained dynamics on SO(3) (Munthe-Kaas form), with
/// lambda re-solved at every stage. Returns the lambda of the first stage.
CoupledState rk4_step(const CoupledState& x, const GrfInput& u, const FootholdSet& feet,
                      const ModelParams& params, const ExternalLoads& loads, double alpha,
                      double dt, double* lambda_out = nullptr);

FailureCause classify_state(const CoupledState& x, const FailureThresholds& th);

/// Scans a state history sampled at times t; returns the first failure.
std::pair<FailureCause, double> classify(const std::vector<double>& t,
                                         const std::vector<CoupledState>& history,
                                         const FailureThresholds& th);

TrialResult rollout(const ScenarioConfig& sc, const SimSettings& settings = {});

/// Same as rollout, driving a caller-owned planner.
TrialResult rollout_with(const ScenarioConfig& sc, const SimSettings& settings, Planner& planner);

}  // namespace coop
