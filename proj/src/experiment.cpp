#include "coop/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "coop/planner_centralized.hpp"
#include "coop/planner_distributed.hpp"
#include "coop/wbc_qp.hpp"

namespace coop::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_schema(const json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", what));
  const int v = j.value("schema_version", -1);
  if (v != kSchemaVersion) {
    throw ConfigError(fmt::format("{}: schema_version {} (expected {})", what, v, kSchemaVersion));
  }
}

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// One 3-vector for both agents, or a list of two.
std::array<Vec3, kNumAgents> per_agent(const json& j) {
  if (j.is_array() && j.size() == kNumAgents && j[0].is_array()) {
    return {vec3_from(j[0]), vec3_from(j[1])};
  }
  const Vec3 v = vec3_from(j);
  return {v, v};
}

CommandProfile command_from_json(const json& j) {
  CommandProfile c;
  c.height = j.value("height", 0.26);
  if (j.contains("knots")) {
    for (const auto& k : j.at("knots")) {
      c.knots.push_back({k.at("t").get<double>(), k.value("vx", 0.0), k.value("vy", 0.0),
                         k.value("yaw_rate", 0.0)});
    }
    if (c.knots.empty()) throw ConfigError("command: empty knot list");
    for (size_t i = 1; i < c.knots.size(); ++i) {
      if (c.knots[i].t <= c.knots[i - 1].t) throw ConfigError("command: knots not increasing");
    }
  } else {
    c.knots.push_back({0.0, j.value("vx", 0.0), j.value("vy", 0.0), j.value("yaw_rate", 0.0)});
  }
  return c;
}

json command_to_json(const CommandProfile& c) {
  json knots = json::array();
  for (const auto& k : c.knots) {
    knots.push_back({{"t", k.t}, {"vx", k.vx}, {"vy", k.vy}, {"yaw_rate", k.yaw_rate}});
  }
  return {{"height", c.height}, {"knots", knots}};
}

const char* curve_name(CurveKind k) { return k == CurveKind::Distance ? "distance" : "time"; }

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s;
}

std::string trial_dir_name(int k) { return fmt::format("trial_{:04d}", k); }

}  // namespace

json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw MissingFile("no such file: " + path.string());
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

ScenarioConfig scenario_from_json(const json& j) {
  check_schema(j, "scenario");
  ScenarioConfig sc;
  try {
    sc.duration = j.value("duration", sc.duration);
    if (j.contains("command")) sc.command = command_from_json(j.at("command"));
    sc.payload_mass = j.value("payload_mass", 0.0);
    sc.friction = j.value("friction", sc.friction);
    sc.planner = planner_kind_from_string(j.value("planner", std::string("centralized")));
    sc.seed = j.value("seed", std::uint64_t{0});
    sc.initial_perturbation = j.value("initial_perturbation", sc.initial_perturbation);
    sc.baumgarte = j.value("baumgarte", sc.baumgarte);
    sc.physics_dt = j.value("physics_dt", sc.physics_dt);
    if (j.contains("gait")) {
      const auto& g = j.at("gait");
      const std::string mode = g.value("mode", std::string("trot"));
      if (mode == "trot") sc.gait.mode = GaitMode::Trot;
      else if (mode == "stand") sc.gait.mode = GaitMode::Stand;
      else throw ConfigError("gait.mode: " + mode);
      sc.gait.swing_time = g.value("swing_time", sc.gait.swing_time);
      sc.gait.stance_time = g.value("stance_time", sc.gait.stance_time);
    }
    if (j.contains("disturbance") && !j.at("disturbance").is_null()) {
      const auto& d = j.at("disturbance");
      DisturbanceSpec ds;
      ds.amplitude = per_agent(d.at("amplitude"));
      ds.period = per_agent(d.at("period"));
      ds.start = d.value("start", ds.start);
      ds.stop = d.value("stop", ds.stop);
      for (const auto& p : ds.period) {
        if ((p.array() <= 0.0).any()) throw ConfigError("disturbance.period must be > 0");
      }
      for (const auto& a : ds.amplitude) {
        if ((a.array() < 0.0).any()) throw ConfigError("disturbance.amplitude must be >= 0");
      }
      sc.disturbance = ds;
    }
    if (j.contains("terrain") && !j.at("terrain").is_null()) {
      const auto& t = j.at("terrain");
      TerrainSpec ts;
      ts.max_height = t.value("max_height", 0.0);
      ts.cell_size = t.value("cell_size", ts.cell_size);
      ts.run_length = t.value("run_length", ts.run_length);
      ts.seed = t.value("seed", std::uint64_t{0});
      if (ts.max_height < 0.0 || ts.cell_size <= 0.0 || ts.run_length <= 0.0) {
        throw ConfigError("terrain: invalid ranges");
      }
      sc.terrain = ts;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (sc.duration <= 0.0 || sc.payload_mass < 0.0 || sc.friction <= 0.0 || sc.physics_dt <= 0.0) {
    throw ConfigError("scenario: invalid ranges");
  }
  return sc;
}

json scenario_to_json(const ScenarioConfig& sc) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["duration"] = sc.duration;
  j["command"] = command_to_json(sc.command);
  j["payload_mass"] = sc.payload_mass;
  j["friction"] = sc.friction;
  j["planner"] = to_string(sc.planner);
  j["seed"] = sc.seed;
  j["initial_perturbation"] = sc.initial_perturbation;
  j["baumgarte"] = sc.baumgarte;
  j["physics_dt"] = sc.physics_dt;
  j["gait"] = {{"mode", sc.gait.mode == GaitMode::Trot ? "trot" : "stand"},
               {"swing_time", sc.gait.swing_time},
               {"stance_time", sc.gait.stance_time}};
  if (sc.disturbance) {
    const auto& d = *sc.disturbance;
    j["disturbance"] = {{"amplitude", {vec3_to(d.amplitude[0]), vec3_to(d.amplitude[1])}},
                        {"period", {vec3_to(d.period[0]), vec3_to(d.period[1])}},
                        {"start", d.start},
                        {"stop", d.stop}};
  } else {
    j["disturbance"] = nullptr;
  }
  if (sc.terrain) {
    const auto& t = *sc.terrain;
    j["terrain"] = {{"max_height", t.max_height},
                    {"cell_size", t.cell_size},
                    {"run_length", t.run_length},
                    {"seed", t.seed}};
  } else {
    j["terrain"] = nullptr;
  }
  return j;
}

ScenarioConfig load_scenario(const fs::path& path) { return scenario_from_json(read_json(path)); }

CampaignSpec campaign_from_json(const json& j) {
  check_schema(j, "campaign");
  CampaignSpec c;
  try {
    json base = j.at("base");
    if (!base.contains("schema_version")) base["schema_version"] = kSchemaVersion;
    c.base = scenario_from_json(base);
    c.trials = j.value("trials", c.trials);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("planners")) {
      c.planners.clear();
      for (const auto& p : j.at("planners")) c.planners.push_back(planner_kind_from_string(p));
    }
    if (j.contains("randomize")) {
      const auto& r = j.at("randomize");
      if (r.contains("terrain_max_height")) c.ranges.terrain_max_height = r.at("terrain_max_height");
      if (r.contains("force_max_amplitude")) {
        c.ranges.force_max_amplitude = r.at("force_max_amplitude");
      }
      if (r.contains("force_period")) {
        c.ranges.force_period_min = r.at("force_period").at(0);
        c.ranges.force_period_max = r.at("force_period").at(1);
      }
      if (r.contains("payload_max")) c.ranges.payload_max = r.at("payload_max");
    }
    c.curve = c.base.terrain ? CurveKind::Distance : CurveKind::Time;
    if (j.contains("curve")) {
      const std::string k = j.at("curve");
      if (k == "distance") c.curve = CurveKind::Distance;
      else if (k == "time") c.curve = CurveKind::Time;
      else throw ConfigError("campaign.curve: " + k);
    }
    c.curve_step = j.value("curve_step", c.curve == CurveKind::Distance ? 0.5 : 1.0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("campaign: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("campaign: ") + e.what());
  }
  if (c.trials < 1 || c.planners.empty() || c.curve_step <= 0.0) {
    throw ConfigError("campaign: need trials >= 1, a planner, and curve_step > 0");
  }
  if (c.ranges.force_period_min <= 0.0 || c.ranges.force_period_max < c.ranges.force_period_min) {
    throw ConfigError("campaign: invalid force_period range");
  }
  return c;
}

json campaign_to_json(const CampaignSpec& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["base"] = scenario_to_json(c.base);
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  json ps = json::array();
  for (auto p : c.planners) ps.push_back(to_string(p));
  j["planners"] = ps;
  json r = json::object();
  if (c.ranges.terrain_max_height) r["terrain_max_height"] = *c.ranges.terrain_max_height;
  if (c.ranges.force_max_amplitude) r["force_max_amplitude"] = *c.ranges.force_max_amplitude;
  r["force_period"] = {c.ranges.force_period_min, c.ranges.force_period_max};
  if (c.ranges.payload_max) r["payload_max"] = *c.ranges.payload_max;
  j["randomize"] = r;
  j["curve"] = curve_name(c.curve);
  j["curve_step"] = c.curve_step;
  return j;
}

CampaignSpec load_campaign(const fs::path& path) { return campaign_from_json(read_json(path)); }

std::uint64_t trial_seed(std::uint64_t master, int k) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(k) + 0x632be59bd9b4e019ULL));
}

ScenarioConfig sample_trial(const CampaignSpec& spec, int k, PlannerKind planner) {
  ScenarioConfig sc = spec.base;
  sc.planner = planner;
  sc.seed = trial_seed(spec.master_seed, k);
  sc.keep_logs = false;
  std::mt19937_64 rng(sc.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const RandomRanges& r = spec.ranges;
  if (r.terrain_max_height) {
    TerrainSpec t = spec.base.terrain.value_or(TerrainSpec{});
    t.max_height = *r.terrain_max_height;
    t.seed = splitmix64(sc.seed);
    sc.terrain = t;
  }
  if (r.force_max_amplitude) {
    DisturbanceSpec d = spec.base.disturbance.value_or(DisturbanceSpec{});
    for (int i = 0; i < kNumAgents; ++i) {
      for (int a = 0; a < 3; ++a) {
        d.amplitude[i](a) = *r.force_max_amplitude * unit(rng);
        d.period[i](a) = r.force_period_min + (r.force_period_max - r.force_period_min) * unit(rng);
      }
    }
    sc.disturbance = d;
  }
  if (r.payload_max) sc.payload_mass = *r.payload_max * unit(rng);
  return sc;
}

// --- Per-trial output -------------------------------------------------------

std::string states_header() {
  std::string h = "t";
  for (int i = 1; i <= kNumAgents; ++i) {
    for (const char* c : {"x", "y", "z", "vx", "vy", "vz", "roll", "pitch", "yaw", "wx", "wy", "wz"}) {
      h += fmt::format(",{}_{}", c, i);
    }
  }
  return h;
}

std::string forces_header() {
  std::string h = "t";
  for (int i = 1; i <= kNumAgents; ++i) {
    for (int l = 0; l < kLegsPerAgent; ++l) {
      for (const char* c : {"fx", "fy", "fz"}) {
        h += fmt::format(",{}_{}_{}", c, leg_name(static_cast<Leg>(l)), i);
      }
    }
  }
  return h;
}

std::string lambda_header() { return "t,lambda_hat_1,lambda_hat_2,lambda_true,psi_err"; }
std::string timing_header() { return "t,solve_ms,agent_ms_1,agent_ms_2"; }

json result_to_json(const TrialResult& r, const ScenarioConfig& sc) {
  const TrialMetrics& m = r.metrics;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["planner"] = to_string(sc.planner);
  j["seed"] = sc.seed;
  j["success"] = r.success;
  j["cause"] = to_string(r.cause);
  j["failure_time"] = r.success ? json(nullptr) : json(r.failure_time);
  j["end_time"] = r.end_time;
  j["metrics"] = {{"distance", m.distance},
                  {"max_psi_err", m.max_psi_err},
                  {"speed_error", m.speed_error},
                  {"velocity_error", m.velocity_error},
                  {"lambda_gap", m.lambda_gap},
                  {"lambda_mean_abs", m.lambda_mean_abs},
                  {"mean_stance_fz", m.mean_stance_fz},
                  {"median_solve_ms", m.median_solve_ms},
                  {"p95_solve_ms", m.p95_solve_ms},
                  {"degraded_ticks", m.degraded_ticks}};
  j["scenario"] = scenario_to_json(sc);
  return j;
}

void write_trial(const fs::path& dir, const TrialResult& r, const ScenarioConfig& sc,
                 bool with_logs) {
  fs::create_directories(dir);
  write_text(dir / "result.json", result_to_json(r, sc).dump(2) + "\n");
  if (!with_logs) return;

  std::string st = states_header() + "\n", fo = forces_header() + "\n";
  std::string la = lambda_header() + "\n", ti = timing_header() + "\n";
  for (const LogRow& row : r.logs) {
    st += fmt::format("{:.4f}", row.t);
    fo += fmt::format("{:.4f}", row.t);
    for (const AgentState& s : row.state) {
      const Vec3 rpy = so3::euler_zyx(s.rotation);
      for (const Vec3* v : {&s.position, &s.velocity, &rpy, &s.omega_body}) {
        st += fmt::format(",{:.9g},{:.9g},{:.9g}", v->x(), v->y(), v->z());
      }
    }
    for (const auto& agent : row.grf) {
      for (const Vec3& f : agent) fo += fmt::format(",{:.9g},{:.9g},{:.9g}", f.x(), f.y(), f.z());
    }
    la += fmt::format("{:.4f},{:.9g},{:.9g},{:.9g},{:.3e}\n", row.t, row.lambda_hat[0],
                      row.lambda_hat[1], row.lambda_true, row.psi_err);
    ti += fmt::format("{:.4f},{:.6f},{:.6f},{:.6f}\n", row.t, row.solve_ms, row.agent_solve_ms[0],
                      row.agent_solve_ms[1]);
    st += "\n";
    fo += "\n";
  }
  write_text(dir / "states.csv", st);
  write_text(dir / "forces.csv", fo);
  write_text(dir / "lambda.csv", la);
  write_text(dir / "timing.csv", ti);
}

// --- Campaigns --------------------------------------------------------------

const PlannerSummary& CampaignSummary::at(PlannerKind k) const {
  for (const auto& p : planners) {
    if (p.planner == k) return p;
  }
  throw std::out_of_range(std::string("campaign has no planner ") + to_string(k));
}

json summary_to_json(const CampaignSummary& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["curve"] = curve_name(s.curve);
  j["wall_seconds"] = s.wall_seconds;
  json ps = json::array();
  for (const auto& p : s.planners) {
    json curve = json::array();
    for (const auto& c : p.curve) curve.push_back({c.at, c.rate});
    ps.push_back({{"planner", to_string(p.planner)},
                  {"trials", p.trials},
                  {"successes", p.successes},
                  {"success_rate", p.rate},
                  {"curve", curve},
                  {"median_solve_ms", p.median_solve_ms},
                  {"p95_solve_ms", p.p95_solve_ms}});
  }
  j["planners"] = ps;
  return j;
}

CampaignSummary run_campaign(const CampaignSpec& spec, const SimSettings& settings, int workers,
                             const std::optional<fs::path>& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_planners = static_cast<int>(spec.planners.size());
  const int jobs = n_planners * spec.trials;
  std::vector<TrialRecord> records(jobs);
  std::atomic<int> next{0};

  auto worker = [&] {
    for (int job = next++; job < jobs; job = next++) {
      const int p = job / spec.trials;
      const int k = job % spec.trials;
      const PlannerKind kind = spec.planners[p];
      const ScenarioConfig sc = sample_trial(spec, k, kind);
      TrialResult r;
      try {
        r = rollout(sc, settings);
      } catch (const std::exception& e) {
        spdlog::warn("trial {} ({}) aborted: {}", k, to_string(kind), e.what());
        r.cause = FailureCause::Internal;
        r.success = false;
      }
      TrialRecord& rec = records[job];
      rec.index = k;
      rec.seed = sc.seed;
      rec.planner = kind;
      rec.success = r.success;
      rec.cause = r.cause;
      rec.end_time = r.end_time;
      rec.distance = r.metrics.distance;
      rec.speed_error = r.metrics.speed_error;
      rec.solve_ms = std::move(r.solve_ms);
      if (out) {
        write_trial(*out / to_string(kind) / trial_dir_name(k), r, sc, false);
      }
      spdlog::debug("trial {} {}: {} at {:.2f}s", k, to_string(kind), to_string(r.cause),
                    r.end_time);
    }
  };
  const int n_workers = std::clamp(workers, 1, std::max(1, jobs));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  CampaignSummary s;
  s.curve = spec.curve;
  const double horizon = spec.curve == CurveKind::Distance
                             ? spec.base.terrain.value_or(TerrainSpec{}).run_length
                             : spec.base.duration;
  for (int p = 0; p < n_planners; ++p) {
    PlannerSummary ps;
    ps.planner = spec.planners[p];
    std::vector<double> times;
    for (int k = 0; k < spec.trials; ++k) {
      const TrialRecord& r = records[p * spec.trials + k];
      ++ps.trials;
      ps.successes += r.success ? 1 : 0;
      times.insert(times.end(), r.solve_ms.begin(), r.solve_ms.end());
    }
    ps.rate = static_cast<double>(ps.successes) / ps.trials;
    const int n_pts = static_cast<int>(std::floor(horizon / spec.curve_step + 1e-9));
    for (int q = 0; q <= n_pts; ++q) {
      const double at = q * spec.curve_step;
      int alive = 0;
      for (int k = 0; k < spec.trials; ++k) {
        const TrialRecord& r = records[p * spec.trials + k];
        const double reached = spec.curve == CurveKind::Distance ? r.distance : r.end_time;
        if (r.success || reached >= at) ++alive;
      }
      ps.curve.push_back({at, static_cast<double>(alive) / spec.trials});
    }
    ps.median_solve_ms = percentile(times, 0.5);
    ps.p95_solve_ms = percentile(times, 0.95);
    s.planners.push_back(std::move(ps));
  }
  for (auto& r : records) r.solve_ms.clear();
  s.trials = std::move(records);
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out) {
    fs::create_directories(*out);
    write_text(*out / "campaign.json", campaign_to_json(spec).dump(2) + "\n");
    write_text(*out / "summary.json", summary_to_json(s).dump(2) + "\n");
  }
  return s;
}

ValidationReport validate_campaign_dir(const fs::path& dir) {
  ValidationReport rep;
  auto fail = [&rep](std::string msg) {
    rep.ok = false;
    rep.problems.push_back(std::move(msg));
  };
  json summary;
  try {
    summary = read_json(dir / "summary.json");
  } catch (const ConfigError& e) {
    fail(e.what());
    return rep;
  }
  if (summary.value("schema_version", -1) != kSchemaVersion) fail("summary.json: schema_version");
  for (const auto& p : summary.value("planners", json::array())) {
    const std::string name = p.value("planner", std::string("?"));
    const fs::path pdir = dir / name;
    int trials = 0, successes = 0;
    if (fs::is_directory(pdir)) {
      for (const auto& entry : fs::directory_iterator(pdir)) {
        const fs::path rj = entry.path() / "result.json";
        if (!fs::exists(rj)) continue;
        try {
          const json r = read_json(rj);
          ++trials;
          successes += r.at("success").get<bool>() ? 1 : 0;
          if (r.value("planner", std::string()) != name) {
            fail(fmt::format("{}: planner field mismatch", rj.string()));
          }
        } catch (const std::exception& e) {
          fail(fmt::format("{}: {}", rj.string(), e.what()));
        }
      }
    }
    if (trials != p.value("trials", -1)) {
      fail(fmt::format("{}: summary lists {} trials, found {} result files", name,
                       p.value("trials", -1), trials));
      continue;
    }
    if (p.value("successes", -1) != successes) {
      fail(fmt::format("{}: summary lists {} successes, result files give {}", name,
                       p.value("successes", -1), successes));
    }
    const double rate = trials > 0 ? static_cast<double>(successes) / trials : 0.0;
    if (std::abs(p.value("success_rate", -1.0) - rate) > 1e-12) {
      fail(fmt::format("{}: success_rate {} != {}", name, p.value("success_rate", -1.0), rate));
    }
  }
  return rep;
}

// --- Timing benchmark -------------------------------------------------------

namespace {

// Runs the centralized planner in closed loop and times a distributed planner
// fed the same inputs; only the centralized commands reach the plant. A shadow
// planner that degrades is restarted from the current state, so every timed
// solve is a successful one near nominal conditions.
class BenchPlanner : public Planner {
 public:
  BenchPlanner(const ModelParams& params, const PlannerOptions& opt, int target)
      : params_(params), opt_(opt), target_(target), central_(params, opt),
        distributed_(std::make_unique<DistributedPlanner>(params, opt, AgreementConfig{})) {}

  std::string name() const override { return "bench"; }
  ControlCommand step(const PlanInput& in) override {
    ControlCommand c = central_.step(in);
    if (static_cast<int>(central_ms.size()) >= target_) return c;
    const ControlCommand d = distributed_->step(in);
    if (d.degraded) {
      ++restarts;
      distributed_ = std::make_unique<DistributedPlanner>(params_, opt_, AgreementConfig{});
    } else if (!c.degraded) {
      central_ms.push_back(c.solve_ms);
      local_ms.push_back(d.agent_solve_ms[0]);
      local_ms.push_back(d.agent_solve_ms[1]);
      central_vars = central_.last_output().num_vars;
      local_vars = distributed_->local_num_vars(0);
    }
    return c;
  }

  std::vector<double> central_ms, local_ms;
  int central_vars = 0, local_vars = 0, restarts = 0;

 private:
  ModelParams params_;
  PlannerOptions opt_;
  int target_;
  CentralizedPlanner central_;
  std::unique_ptr<DistributedPlanner> distributed_;
};

// Whole-body QP of one A1-like agent (12 joints, 18 outputs) with `legs` contacts.
IoLinData synthetic_wbc(int legs, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  auto rnd = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = n(rng);
    return m;
  };
  const int nt = 12, ny = 18, nf = 3 * legs;
  IoLinData d;
  d.Phi_tau = rnd(ny, nt);
  d.Phi_f = rnd(ny, nf);
  d.phi = rnd(ny, 1);
  d.Theta_tau = rnd(nf, nt);
  d.Theta_f = rnd(nf, nf) + 5.0 * Eigen::MatrixXd::Identity(nf, nf);
  d.theta = rnd(nf, 1);
  d.y = 0.01 * rnd(ny, 1);
  d.y_dot = 0.01 * rnd(ny, 1);
  d.kp = Eigen::VectorXd::Constant(ny, 100.0);
  d.kd = Eigen::VectorXd::Constant(ny, 20.0);
  d.f_des = Eigen::VectorXd::Zero(nf);
  for (int l = 0; l < legs; ++l) d.f_des(3 * l + 2) = 12.45 * 9.81 / legs;
  return d;
}

}  // namespace

BenchResult run_bench(int m_u, int solves, const SimSettings& settings) {
  if (m_u != 4 && m_u != 8) throw std::invalid_argument("run_bench: m_u must be 4 or 8");
  ScenarioConfig sc;
  sc.command = CommandProfile::constant(m_u == 4 ? 0.3 : 0.0);
  sc.gait.mode = m_u == 4 ? GaitMode::Trot : GaitMode::Stand;
  // Room for shadow restarts; timing stops once `solves` samples are in.
  sc.duration = 4 * solves * settings.planner.weights.dt;
  sc.seed = 11;
  sc.keep_logs = false;
  BenchPlanner bp(settings.model, settings.planner, solves);
  rollout_with(sc, settings, bp);

  BenchResult r;
  r.m_u = m_u;
  r.solves = static_cast<int>(bp.central_ms.size());
  r.centralized_vars = bp.central_vars;
  r.local_vars = bp.local_vars;
  r.shadow_restarts = bp.restarts;
  r.centralized_median_ms = percentile(bp.central_ms, 0.5);
  r.local_median_ms = percentile(bp.local_ms, 0.5);
  r.ratio = r.centralized_median_ms > 0.0 ? r.local_median_ms / r.centralized_median_ms : 0.0;

  std::mt19937_64 rng(7);
  std::vector<double> wbc_ms;
  const int legs = m_u / 2;
  for (int k = 0; k < solves; ++k) {
    const IoLinData d = synthetic_wbc(legs, rng);
    const WbcSolution s = solve_wbc(d);
    if (s.status == QpStatus::Optimal) wbc_ms.push_back(1e3 * s.solve_time);
    if (k == 0) r.wbc_vars = d.n_tau() + d.n_f() + d.n_y();
  }
  r.wbc_median_ms = percentile(wbc_ms, 0.5);
  return r;
}

json bench_to_json(const std::vector<BenchResult>& rs) {
  json arr = json::array();
  for (const auto& r : rs) {
    arr.push_back({{"m_u", r.m_u},
                   {"solves", r.solves},
                   {"centralized_vars", r.centralized_vars},
                   {"local_vars", r.local_vars},
                   {"shadow_restarts", r.shadow_restarts},
                   {"centralized_median_ms", r.centralized_median_ms},
                   {"local_median_ms", r.local_median_ms},
                   {"ratio", r.ratio},
                   {"wbc_vars", r.wbc_vars},
                   {"wbc_median_ms", r.wbc_median_ms}});
  }
  return {{"schema_version", kSchemaVersion}, {"bench", arr}};
}

}  // namespace coop::experiment
