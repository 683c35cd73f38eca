#pragma once

// SO(3)/SE(3) primitives and the SE(2)-to-SE(3) lift used throughout.
// Conventions: rotations are world-from-body matrices, tangent vectors are
// right (body-frame) perturbations, se(3) vectors store rotation first.

#include <Eigen/Core>

namespace se2lio {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Rotation taylor branches: below kExpTaylor the Rodrigues coefficients use
// their series, below kJacTaylor the inverse right Jacobian drops its K^2 term.
inline constexpr double kExpTaylor = 1e-8;
inline constexpr double kJacTaylor = 1e-5;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

inline Vec3 unskew(const Mat3& m) {
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

// exp: axis-angle (rad) to rotation matrix.
Mat3 so3_exp(const Vec3& phi);

// log: principal axis-angle, |phi| in [0, pi]. Near pi the axis comes from the
// largest diagonal column of (R + I)/2. Throws std::invalid_argument if R
// violates orthonormality beyond 1e-6.
Vec3 so3_log(const Mat3& R);

// Right Jacobian of SO(3) and its inverse (closed forms, taylor below kJacTaylor).
Mat3 so3_right_jacobian(const Vec3& phi);
Mat3 so3_right_jacobian_inv(const Vec3& phi);

// Rigid transform. act() maps body coordinates to world.
struct Se3 {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();

  Vec3 act(const Vec3& x) const { return R * x + p; }
  Se3 inverse() const { return {R.transpose(), -(R.transpose() * p)}; }
  Se3 operator*(const Se3& o) const { return {R * o.R, R * o.p + p}; }
};

// xi = [phi; rho], rotation part first. Translation uses the left Jacobian
// of the rotation block so that exp/log are exact inverses.
Se3 se3_exp(const Vec6& xi);
Vec6 se3_log(const Se3& T);

// Planar pose: yaw wrapped to (-pi, pi], translation in the ground plane.
struct Se2Pose {
  double yaw = 0.0;
  Vec2 d = Vec2::Zero();
};

double wrap_angle(double a);

// Embeds an SE(2) pose in SE(3): R = exp([0,0,yaw]^), p = [d, 0].
Se3 se2_lift(const Se2Pose& pose);

// Yaw/tilt split of a near-planar rotation: R = exp([tilt_xy; 0]^) * Rz(yaw).
// Returns {yaw, tilt_x, tilt_y}; exact for any R (swing-twist about e3).
Vec3 yaw_tilt_split(const Mat3& R);

}  // namespace se2lio
