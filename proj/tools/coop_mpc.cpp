// Command-line front end: simulate, montecarlo, bench, validate.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "coop/experiment.hpp"
#include "coop/log.hpp"

namespace fs = std::filesystem;
namespace ex = coop::experiment;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitMissingFile = 2;
constexpr int kExitBadConfig = 3;

int cmd_simulate(const std::string& scenario, const std::optional<std::string>& planner,
                 const std::optional<std::uint64_t>& seed, const std::string& out) {
  coop::ScenarioConfig sc = ex::load_scenario(scenario);
  if (planner) sc.planner = coop::planner_kind_from_string(*planner);
  if (seed) sc.seed = *seed;
  const coop::TrialResult r = coop::rollout(sc);
  ex::write_trial(out, r, sc);
  fmt::print("{} planner={} seed={} cause={} end={:.3f}s speed_err={:.4f} median_solve={:.3f}ms\n",
             r.success ? "SUCCESS" : "FAILURE", coop::to_string(sc.planner), sc.seed,
             coop::to_string(r.cause), r.end_time, r.metrics.speed_error,
             r.metrics.median_solve_ms);
  return 0;
}

int cmd_montecarlo(const std::string& campaign, const std::optional<std::string>& planner,
                   const std::optional<std::uint64_t>& seed, const std::optional<int>& trials,
                   int workers, const std::string& out) {
  ex::CampaignSpec spec = ex::load_campaign(campaign);
  if (planner) spec.planners = {coop::planner_kind_from_string(*planner)};
  if (seed) spec.master_seed = *seed;
  if (trials) spec.trials = *trials;
  const ex::CampaignSummary s = ex::run_campaign(spec, {}, workers, fs::path(out));
  for (const auto& p : s.planners) {
    fmt::print("{:<12} {:>4}/{:<4} success {:6.1f}%  median solve {:.3f} ms\n",
               coop::to_string(p.planner), p.successes, p.trials, 100.0 * p.rate,
               p.median_solve_ms);
  }
  fmt::print("wall {:.1f} s, summary in {}\n", s.wall_seconds, (fs::path(out) / "summary.json").string());
  return 0;
}

int cmd_bench(int solves, const std::string& out) {
  std::vector<ex::BenchResult> rs;
  bool ok = true;
  for (int m_u : {4, 8}) {
    const ex::BenchResult r = ex::run_bench(m_u, solves);
    fmt::print("m_u={} vars {}/{}  centralized {:.3f} ms  distributed/agent {:.3f} ms  ratio {:.3f}"
               "  ({} solves, {} shadow restarts)  wbc ({} vars) {:.3f} ms\n",
               r.m_u, r.centralized_vars, r.local_vars, r.centralized_median_ms,
               r.local_median_ms, r.ratio, r.solves, r.shadow_restarts, r.wbc_vars,
               r.wbc_median_ms);
    ok = ok && r.ratio < 0.6;
    rs.push_back(r);
  }
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "bench.json") << ex::bench_to_json(rs).dump(2) << "\n";
  }
  fmt::print("ratio < 0.6: {}\n", ok ? "pass" : "FAIL");
  return ok ? 0 : kExitFailure;
}

int cmd_validate(const std::string& dir) {
  const ex::ValidationReport rep = ex::validate_campaign_dir(dir);
  for (const auto& p : rep.problems) fmt::print(stderr, "{}\n", p);
  fmt::print("{}\n", rep.ok ? "valid" : "INVALID");
  return rep.ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  coop::init_logging();
  CLI::App app{"Cooperative quadruped MPC: reduced-order simulation and experiments"};
  app.require_subcommand(1);

  std::string scenario, campaign, out = "out", dir;
  std::optional<std::string> planner;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int solves = 1000;

  auto* sim = app.add_subcommand("simulate", "Run one closed-loop trial");
  sim->add_option("--scenario", scenario, "Scenario JSON")->required();
  sim->add_option("--planner", planner, "nominal | centralized | distributed");
  sim->add_option("--seed", seed, "Trial seed");
  sim->add_option("--out", out, "Output directory");

  auto* mc = app.add_subcommand("montecarlo", "Run a seeded Monte Carlo campaign");
  mc->add_option("--campaign", campaign, "Campaign JSON")->required();
  mc->add_option("--planner", planner, "Restrict to one planner");
  mc->add_option("--seed", seed, "Master seed");
  mc->add_option("--trials", trials, "Trials per planner");
  mc->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  mc->add_option("--out", out, "Output directory");

  auto* bench = app.add_subcommand("bench", "Time centralized vs distributed QP solves");
  bench->add_option("--trials", solves, "Solves per configuration")->check(CLI::PositiveNumber);
  bench->add_option("--out", out, "Output directory for bench.json");

  auto* val = app.add_subcommand("validate", "Cross-check a campaign output directory");
  val->add_option("--out", dir, "Campaign output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(scenario, planner, seed, out);
    if (*mc) return cmd_montecarlo(campaign, planner, seed, trials, workers, out);
    if (*bench) return cmd_bench(solves, out);
    if (*val) return cmd_validate(dir);
  } catch (const ex::MissingFile& e) {
    spdlog::error("{}", e.what());
    return kExitMissingFile;
  } catch (const ex::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kExitBadConfig;
  }
  return kExitFailure;
}
