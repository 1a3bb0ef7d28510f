#pragma once

#include <Eigen/Dense>

namespace coop {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Element of SO(3). Callers keep R^T R = I and det R = 1.
using RotationMatrix = Mat3;
/// Exponential coordinates (rad) or an angular velocity (rad/s).
using AxisVector = Vec3;

namespace so3 {

/// Below this angle exp/log switch to their Taylor expansions.
inline constexpr double kSmallAngle = 1e-6;

Mat3 hat(const Vec3& v);

/// Inverse of hat. Throws std::invalid_argument when ||M + M^T|| >= 1e-9.
Vec3 vee(const Mat3& m);

RotationMatrix exp(const AxisVector& xi);

/// Principal logarithm. Throws std::domain_error when the rotation angle is
/// within 1e-6 of pi, where the axis is ill-defined.
AxisVector log(const RotationMatrix& r);

/// Inverse right Jacobian: for R = R0 exp(hat(xi)) and dR/dt = R hat(w),
/// dxi/dt = right_jacobian_inv(xi) * w.
Mat3 right_jacobian_inv(const AxisVector& xi);

bool is_rotation(const Mat3& r, double tol = 1e-9);

RotationMatrix rot_z(double yaw);

/// (roll, pitch, yaw) of R = Rz(yaw) Ry(pitch) Rx(roll).
Vec3 euler_zyx(const RotationMatrix& r);

/// Nearest rotation in the Frobenius sense (polar factor).
RotationMatrix project(const Mat3& m);

}  // namespace so3
}  // namespace coop
