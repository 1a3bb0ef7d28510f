#pragma once

#include <array>
#include <vector>

#include "coop/linearizer.hpp"

namespace coop {

enum class GaitMode { Trot, Stand };

struct GaitConfig {
  GaitMode mode = GaitMode::Trot;
  double swing_time = 0.2;   // s
  double stance_time = 0.2;  // s
  // Phase offset (s) of each leg; diagonal pairs share a phase.
  std::array<double, kLegsPerAgent> phase_offset = {0.0, 0.2, 0.2, 0.0};

  double period() const { return swing_time + stance_time; }
};

using StanceFlags = std::array<bool, kLegsPerAgent>;
using ContactState = std::array<StanceFlags, kNumAgents>;

/// Both agents follow the same schedule. At t = 0 the (LF, RH) pair is in stance.
ContactState contact_state(double t, const GaitConfig& g);

/// Time (s) until the leg's current phase (stance or swing) ends.
double time_to_phase_end(double t, Leg leg, const GaitConfig& g);

/// Default feedback gain sqrt(h0 / g).
double raibert_gain(double standing_height, double gravity);

/// p_xy = hip_xy + (T_st / 2) v_xy + k (v - v_des)_xy, p_z = terrain_z.
Vec3 raibert_foothold(const Vec3& hip, const Vec3& v, const Vec3& v_des, double stance_time,
                      double k, double terrain_z);

struct CommandKnot {
  double t = 0.0;
  double vx = 0.0;        // m/s, world frame
  double vy = 0.0;        // m/s, world frame
  double yaw_rate = 0.0;  // rad/s
};

/// Piecewise-linear command; held constant outside the knot range.
struct CommandProfile {
  std::vector<CommandKnot> knots;
  double height = 0.26;  // m

  CommandKnot at(double t) const;
  /// Integral of the planar velocity and yaw rate over [t0, t1], exact for
  /// the piecewise-linear profile.
  Eigen::Vector3d integral(double t0, double t1) const;

  static CommandProfile constant(double vx, double vy = 0.0, double yaw_rate = 0.0,
                                 double height = 0.26);
};

/// Desired local states at t + k dt for k = 1..N in the chart of `chart`.
/// Planar positions are integrated from the current position with the
/// trapezoid rule over each dt interval; attitude targets are yaw-only.
std::vector<LocalState> reference_trajectory(const CoupledState& x_t, double t,
                                             const CommandProfile& cmd, int horizon,
                                             double dt, const CoupledState& chart);

}  // namespace coop
