#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coop/sim.hpp"

namespace coop::experiment {

inline constexpr int kSchemaVersion = 1;

/// Malformed or unreadable configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Configuration path does not exist (the CLI maps this to exit code 2).
struct MissingFile : ConfigError {
  using ConfigError::ConfigError;
};

nlohmann::json read_json(const std::filesystem::path& path);

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& sc);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Per-trial randomization. Unset ranges leave the base scenario untouched.
struct RandomRanges {
  std::optional<double> terrain_max_height;  // m; a fresh heightmap per trial
  std::optional<double> force_max_amplitude; // N; per agent and axis, U[0, max]
  double force_period_min = 0.4;             // s
  double force_period_max = 4.0;             // s
  std::optional<double> payload_max;         // kg, U[0, max]
};

enum class CurveKind { Distance, Time };

struct CampaignSpec {
  ScenarioConfig base;
  int trials = 100;
  std::vector<PlannerKind> planners{PlannerKind::Nominal, PlannerKind::Centralized,
                                    PlannerKind::Distributed};
  std::uint64_t master_seed = 1;
  RandomRanges ranges;
  CurveKind curve = CurveKind::Time;
  double curve_step = 1.0;  // m or s
};

CampaignSpec campaign_from_json(const nlohmann::json& j);
nlohmann::json campaign_to_json(const CampaignSpec& c);
CampaignSpec load_campaign(const std::filesystem::path& path);

/// Counter-based split: trial k's seed depends only on (master, k).
std::uint64_t trial_seed(std::uint64_t master, int k);

/// Scenario of trial k; identical for every planner (paired comparison).
ScenarioConfig sample_trial(const CampaignSpec& spec, int k, PlannerKind planner);

// --- Per-trial output -------------------------------------------------------

std::string states_header();
std::string forces_header();
std::string lambda_header();
std::string timing_header();

nlohmann::json result_to_json(const TrialResult& r, const ScenarioConfig& sc);

/// Writes states.csv, forces.csv, lambda.csv, timing.csv and result.json.
void write_trial(const std::filesystem::path& dir, const TrialResult& r, const ScenarioConfig& sc,
                 bool with_logs = true);

// --- Campaigns --------------------------------------------------------------

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  PlannerKind planner = PlannerKind::Nominal;
  bool success = false;
  FailureCause cause = FailureCause::None;
  double end_time = 0.0;
  double distance = 0.0;
  double speed_error = 0.0;
  std::vector<double> solve_ms;
};

struct CurvePoint {
  double at = 0.0;    // m or s
  double rate = 0.0;  // fraction of trials still alive
};

struct PlannerSummary {
  PlannerKind planner = PlannerKind::Nominal;
  int trials = 0;
  int successes = 0;
  double rate = 0.0;
  std::vector<CurvePoint> curve;
  double median_solve_ms = 0.0;
  double p95_solve_ms = 0.0;
};

struct CampaignSummary {
  CurveKind curve = CurveKind::Time;
  std::vector<PlannerSummary> planners;
  std::vector<TrialRecord> trials;
  double wall_seconds = 0.0;

  const PlannerSummary& at(PlannerKind k) const;
};

nlohmann::json summary_to_json(const CampaignSummary& s);

/// Runs every (planner, trial) pair on `workers` threads. With `out`, writes
/// <out>/<planner>/trial_NNNN/result.json per trial and <out>/summary.json.
CampaignSummary run_campaign(const CampaignSpec& spec, const SimSettings& settings, int workers,
                             const std::optional<std::filesystem::path>& out = std::nullopt);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Cross-checks summary.json rates against the per-trial result.json files.
ValidationReport validate_campaign_dir(const std::filesystem::path& dir);

// --- Timing benchmark -------------------------------------------------------

struct BenchResult {
  int m_u = 0;  // total stance legs over both agents
  int solves = 0;
  int centralized_vars = 0;
  int local_vars = 0;
  int shadow_restarts = 0;  // distributed shadow planner re-bootstraps
  double centralized_median_ms = 0.0;
  double local_median_ms = 0.0;  // per agent
  double ratio = 0.0;            // local / centralized
  int wbc_vars = 0;
  double wbc_median_ms = 0.0;
};

/// Times centralized and per-agent distributed solves along a nominal
/// closed-loop run (trot for m_u = 4, all-legs stand for m_u = 8), plus a
/// synthetic whole-body QP with one agent's stance at that m_u. Only ticks where
/// both planners succeed are timed.
BenchResult run_bench(int m_u, int solves, const SimSettings& settings = {});

nlohmann::json bench_to_json(const std::vector<BenchResult>& r);

}  // namespace coop::experiment
