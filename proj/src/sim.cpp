#include "coop/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace coop {

namespace {

double psi_error(const CoupledState& x, const ModelParams& params) {
  const Vec3 dp = interaction_point(x.agents[0], params.agents[0]) -
                  interaction_point(x.agents[1], params.agents[1]);
  return std::abs(0.5 * dp.squaredNorm() - params.psi0());
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Vec3 DisturbanceSpec::force(int agent, double t) const {
  if (t < start || t > stop) return Vec3::Zero();
  Vec3 f;
  for (int a = 0; a < 3; ++a) {
    f(a) = amplitude[agent](a) * std::sin(2.0 * std::numbers::pi * (t - start) / period[agent](a));
  }
  return f;
}

double TerrainSpec::height(double x, double y) const {
  if (max_height <= 0.0) return 0.0;
  const auto ix = static_cast<std::int64_t>(std::floor(x / cell_size));
  const auto iy = static_cast<std::int64_t>(std::floor(y / cell_size));
  const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ix) ^
                                                       splitmix64(static_cast<std::uint64_t>(iy))));
  return max_height * static_cast<double>(h >> 11) * 0x1.0p-53;
}

const char* to_string(FailureCause c) {
  switch (c) {
    case FailureCause::None: return "none";
    case FailureCause::TipOver: return "tip-over";
    case FailureCause::HeightCollapse: return "height-collapse";
    case FailureCause::Solver: return "solver";
    case FailureCause::Internal: return "internal";
  }
  return "?";
}

CoupledState initial_state(const ModelParams& params, const ScenarioConfig& sc) {
  CoupledState x;
  const double half = 0.5 * params.bar_length;
  for (int i = 0; i < kNumAgents; ++i) {
    AgentState& s = x.agents[i];
    s.position = Vec3(0.0, i == 0 ? half : -half, params.agents[i].standing_height);
  }
  if (sc.initial_perturbation > 0.0) {
    std::mt19937_64 rng(splitmix64(sc.seed));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = sc.initial_perturbation;
    for (auto& s : x.agents) {
      for (int k = 0; k < 3; ++k) {
        s.position(k) += a * 0.005 * u(rng);
        s.velocity(k) += a * 0.02 * u(rng);
        s.omega_body(k) += a * 0.05 * u(rng);
      }
      Vec3 xi;
      for (int k = 0; k < 3; ++k) xi(k) = a * 0.01 * u(rng);
      s.rotation = so3::exp(xi);
    }
  }
  return project_to_manifold(x, params);
}

ExternalLoads external_loads(const ScenarioConfig& sc, const ModelParams& params, double t) {
  ExternalLoads loads;
  for (int i = 0; i < kNumAgents; ++i) {
    if (sc.disturbance) loads[i].force_at_com = sc.disturbance->force(i, t);
    loads[i].force_at_interaction = Vec3(0.0, 0.0, -0.5 * sc.payload_mass * params.gravity);
  }
  return loads;
}

CoupledState rk4_step(const CoupledState& x, const GrfInput& u, const FootholdSet& feet,
                      const ModelParams& params, const ExternalLoads& loads, double alpha,
                      double dt, double* lambda_out) {
  OperatingPoint chart;
  chart.x = x;
  chart.feet = feet;
  chart.u = u;
  const Eigen::VectorXd us = stack_grf(u);
  double first_lambda = 0.0;
  bool first = true;
  auto field = [&](const LocalState& z) {
    const CoupledState xs = from_local(z, x);
    const double lam = solve_lambda(xs, u, feet, params, alpha, loads);
    if (first) {
      first_lambda = lam;
      first = false;
    }
    return local_vector_field(z, us, lam, chart, params, loads);
  };
  const LocalState z0 = to_local(x, x);
  const LocalState k1 = field(z0);
  const LocalState k2 = field(z0 + 0.5 * dt * k1);
  const LocalState k3 = field(z0 + 0.5 * dt * k2);
  const LocalState k4 = field(z0 + dt * k3);
  if (lambda_out) *lambda_out = first_lambda;
  return from_local(z0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), x);
}

FailureCause classify_state(const CoupledState& x, const FailureThresholds& th) {
  if (!is_finite(x)) return FailureCause::Internal;
  for (const auto& s : x.agents) {
    const Vec3 rpy = so3::euler_zyx(s.rotation);
    // Beyond 90 degrees of tilt the ZYX angles wrap; the z axis catches it.
    const bool flipped = s.rotation(2, 2) < 0.0;
    if (flipped || std::abs(rpy.x()) > th.max_tilt || std::abs(rpy.y()) > th.max_tilt) {
      return FailureCause::TipOver;
    }
    if (s.position.z() < th.min_height) return FailureCause::HeightCollapse;
  }
  return FailureCause::None;
}

std::pair<FailureCause, double> classify(const std::vector<double>& t,
                                         const std::vector<CoupledState>& history,
                                         const FailureThresholds& th) {
  for (size_t k = 0; k < history.size(); ++k) {
    const FailureCause c = classify_state(history[k], th);
    if (c != FailureCause::None) return {c, t[k]};
  }
  return {FailureCause::None, 0.0};
}

TrialResult rollout(const ScenarioConfig& sc, const SimSettings& settings) {
  PlannerOptions opt = settings.planner;
  opt.weights.friction = sc.friction;
  auto planner = make_planner(sc.planner, settings.model, opt);
  return rollout_with(sc, settings, *planner);
}

TrialResult rollout_with(const ScenarioConfig& sc, const SimSettings& settings, Planner& planner) {
  const ModelParams& params = settings.model;
  const double dt_ctrl = settings.planner.weights.dt;
  const int substeps = std::max(1, static_cast<int>(std::lround(dt_ctrl / sc.physics_dt)));
  const double h = dt_ctrl / substeps;
  const double k_raibert = raibert_gain(params.agents[0].standing_height, params.gravity);

  TrialResult res;
  CoupledState x = initial_state(params, sc);
  const double x_start = 0.5 * (x.agents[0].position.x() + x.agents[1].position.x());
  FootholdSet feet;
  for (int i = 0; i < kNumAgents; ++i) {
    for (int l = 0; l < kLegsPerAgent; ++l) feet[i].legs[l].leg = static_cast<Leg>(l);
  }
  ContactState prev_contact{};

  double sum_speed = 0.0, sum_vel = 0.0, sum_gap = 0.0, sum_abs = 0.0, sum_fz = 0.0;
  long n_post = 0, n_fz = 0;
  int degraded_run = 0;
  double t = 0.0;
  const long n_ticks = std::lround(sc.duration / dt_ctrl);

  for (long tick = 0; tick < n_ticks; ++tick) {
    t = tick * dt_ctrl;
    const ContactState contact = contact_state(t, sc.gait);
    const CommandKnot c = sc.command.at(t);
    const Vec3 v_des(c.vx, c.vy, 0.0);
    for (int i = 0; i < kNumAgents; ++i) {
      const AgentState& s = x.agents[i];
      for (int l = 0; l < kLegsPerAgent; ++l) {
        Foothold& f = feet[i].legs[l];
        if (contact[i][l] && (tick == 0 || !prev_contact[i][l])) {
          const Vec3 hip = s.position + s.rotation * params.agents[i].hip_offsets[l];
          const Vec3 v = tick == 0 ? Vec3::Zero() : Vec3(s.velocity.x(), s.velocity.y(), 0.0);
          const Vec3 vd = tick == 0 ? Vec3::Zero() : v_des;
          Vec3 p = raibert_foothold(hip, v, vd, sc.gait.stance_time, k_raibert, 0.0);
          p.z() = sc.terrain ? sc.terrain->height(p.x(), p.y()) : 0.0;
          f.position = p;
        }
        f.in_contact = contact[i][l];
      }
    }
    prev_contact = contact;

    PlanInput in;
    in.tick = tick;
    in.t = t;
    in.x = x;
    in.feet = feet;
    in.command = &sc.command;
    ControlCommand cmd;
    try {
      cmd = planner.step(in);
    } catch (const std::exception& e) {
      spdlog::debug("planner exception at t={:.3f}: {}", t, e.what());
      res.cause = FailureCause::Internal;
      res.failure_time = t;
      break;
    }
    res.solve_ms.push_back(cmd.solve_ms);
    if (cmd.degraded) {
      ++res.metrics.degraded_ticks;
      if (++degraded_run > settings.thresholds.max_degraded_ticks) {
        res.cause = FailureCause::Solver;
        res.failure_time = t;
        break;
      }
    } else {
      degraded_run = 0;
    }

    LogRow row;
    row.t = t;
    row.state = x.agents;
    row.lambda_hat = cmd.lambda_hat;
    row.solve_ms = cmd.solve_ms;
    row.agent_solve_ms = cmd.agent_solve_ms;
    for (int i = 0; i < kNumAgents; ++i) {
      int k = 0;
      for (int l = 0; l < kLegsPerAgent; ++l) {
        row.grf[i][l] = feet[i].legs[l].in_contact ? Vec3(cmd.u[i].segment<3>(3 * k++))
                                                    : Vec3::Zero();
      }
    }

    bool failed = false;
    try {
      for (int s = 0; s < substeps; ++s) {
        const double ts = t + s * h;
        double lam = 0.0;
        x = rk4_step(x, cmd.u, feet, params, external_loads(sc, params, ts), sc.baumgarte, h,
                     &lam);
        if (s == 0) row.lambda_true = lam;
        const double pe = psi_error(x, params);
        res.metrics.max_psi_err = std::max(res.metrics.max_psi_err, pe);
        const FailureCause fc = classify_state(x, settings.thresholds);
        if (fc != FailureCause::None) {
          res.cause = fc;
          res.failure_time = ts + h;
          failed = true;
          break;
        }
      }
    } catch (const std::exception& e) {
      spdlog::debug("physics exception at t={:.3f}: {}", t, e.what());
      res.cause = FailureCause::Internal;
      res.failure_time = t;
      failed = true;
    }
    row.psi_err = psi_error(x, params);
    if (sc.keep_logs) res.logs.push_back(row);

    if (t >= settings.transient) {
      const double v_cmd = std::hypot(c.vx, c.vy);
      for (int i = 0; i < kNumAgents; ++i) {
        const Vec3& v = row.state[i].velocity;
        sum_speed += std::abs(std::hypot(v.x(), v.y()) - v_cmd);
        sum_vel += std::hypot(v.x() - c.vx, v.y() - c.vy);
        for (int l = 0; l < kLegsPerAgent; ++l) {
          if (feet[i].legs[l].in_contact) {
            sum_fz += row.grf[i][l].z();
            ++n_fz;
          }
        }
      }
      sum_gap += std::abs(cmd.lambda_hat[0] - cmd.lambda_hat[1]);
      sum_abs += 0.5 * (std::abs(cmd.lambda_hat[0]) + std::abs(cmd.lambda_hat[1]));
      ++n_post;
    }
    if (failed) break;

    res.metrics.distance =
        0.5 * (x.agents[0].position.x() + x.agents[1].position.x()) - x_start;
    if (sc.terrain && res.metrics.distance >= sc.terrain->run_length) {
      t += dt_ctrl;
      break;
    }
    t += dt_ctrl;
  }

  res.end_time = res.cause == FailureCause::None ? t : res.failure_time;
  res.success = res.cause == FailureCause::None;
  if (res.cause == FailureCause::None) {
    res.metrics.distance = 0.5 * (x.agents[0].position.x() + x.agents[1].position.x()) - x_start;
  }
  if (n_post > 0) {
    res.metrics.speed_error = sum_speed / (2.0 * n_post);
    res.metrics.velocity_error = sum_vel / (2.0 * n_post);
    res.metrics.lambda_gap = sum_gap / n_post;
    res.metrics.lambda_mean_abs = sum_abs / n_post;
  }
  if (n_fz > 0) res.metrics.mean_stance_fz = sum_fz / n_fz;
  res.metrics.median_solve_ms = percentile(res.solve_ms, 0.5);
  res.metrics.p95_solve_ms = percentile(res.solve_ms, 0.95);
  return res;
}

}  // namespace coop
