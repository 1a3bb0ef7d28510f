#include "coop/gait.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coop {

namespace {

// Guards phase boundaries against round-off from accumulated tick times.
constexpr double kPhaseEps = 1e-9;

double phase_time(double t, Leg leg, const GaitConfig& g) {
  const double T = g.period();
  double ph = std::fmod(t + g.phase_offset[static_cast<int>(leg)] + kPhaseEps, T);
  if (ph < 0.0) ph += T;
  return ph;
}

}  // namespace

ContactState contact_state(double t, const GaitConfig& g) {
  if (t < 0.0) throw std::invalid_argument("contact_state: t must be non-negative");
  StanceFlags flags{};
  for (int l = 0; l < kLegsPerAgent; ++l) {
    flags[l] = g.mode == GaitMode::Stand ||
               phase_time(t, static_cast<Leg>(l), g) < g.stance_time;
  }
  return {flags, flags};
}

double time_to_phase_end(double t, Leg leg, const GaitConfig& g) {
  if (g.mode == GaitMode::Stand) return g.period();
  const double ph = phase_time(t, leg, g);
  return ph < g.stance_time ? g.stance_time - ph : g.period() - ph;
}

double raibert_gain(double standing_height, double gravity) {
  return std::sqrt(standing_height / gravity);
}

Vec3 raibert_foothold(const Vec3& hip, const Vec3& v, const Vec3& v_des, double stance_time,
                      double k, double terrain_z) {
  Vec3 p = hip + 0.5 * stance_time * v + k * (v - v_des);
  p.z() = terrain_z;
  return p;
}

CommandKnot CommandProfile::at(double t) const {
  if (knots.empty()) return CommandKnot{t, 0.0, 0.0, 0.0};
  if (t <= knots.front().t) return {t, knots.front().vx, knots.front().vy, knots.front().yaw_rate};
  if (t >= knots.back().t) return {t, knots.back().vx, knots.back().vy, knots.back().yaw_rate};
  const auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double v, const CommandKnot& k) { return v < k.t; });
  const auto lo = hi - 1;
  const double s = (t - lo->t) / (hi->t - lo->t);
  return {t, lo->vx + s * (hi->vx - lo->vx), lo->vy + s * (hi->vy - lo->vy),
          lo->yaw_rate + s * (hi->yaw_rate - lo->yaw_rate)};
}

Eigen::Vector3d CommandProfile::integral(double t0, double t1) const {
  // Split at knots so each trapezoid is exact.
  std::vector<double> cuts{t0};
  for (const auto& k : knots) {
    if (k.t > t0 && k.t < t1) cuts.push_back(k.t);
  }
  cuts.push_back(t1);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const CommandKnot a = at(cuts[i]);
    const CommandKnot b = at(cuts[i + 1]);
    const double h = cuts[i + 1] - cuts[i];
    acc += 0.5 * h * Eigen::Vector3d(a.vx + b.vx, a.vy + b.vy, a.yaw_rate + b.yaw_rate);
  }
  return acc;
}

CommandProfile CommandProfile::constant(double vx, double vy, double yaw_rate, double height) {
  CommandProfile c;
  c.knots = {{0.0, vx, vy, yaw_rate}};
  c.height = height;
  return c;
}

std::vector<LocalState> reference_trajectory(const CoupledState& x_t, double t,
                                             const CommandProfile& cmd, int horizon,
                                             double dt, const CoupledState& chart) {
  std::vector<LocalState> out(horizon);
  for (int k = 1; k <= horizon; ++k) {
    const double tk = t + k * dt;
    const CommandKnot c = cmd.at(tk);
    const Eigen::Vector3d moved = cmd.integral(t, tk);
    LocalState& z = out[k - 1];
    for (int i = 0; i < kNumAgents; ++i) {
      const AgentState& s = x_t.agents[i];
      const double yaw0 = so3::euler_zyx(s.rotation).z();
      const double yaw = yaw0 + moved.z();
      auto blk = z.segment<kAgentStateDim>(kAgentStateDim * i);
      blk.segment<3>(kPos) = Vec3(s.position.x() + moved.x(), s.position.y() + moved.y(),
                                  cmd.height);
      blk.segment<3>(kVel) = Vec3(c.vx, c.vy, 0.0);
      blk.segment<3>(kRot) = so3::log(chart.agents[i].rotation.transpose() * so3::rot_z(yaw));
      blk.segment<3>(kOmega) = Vec3(0.0, 0.0, c.yaw_rate);
    }
  }
  return out;
}

}  // namespace coop
