#include "se2lio/lie.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

namespace se2lio {

Mat3 so3_exp(const Vec3& phi) {
  const double t2 = phi.squaredNorm();
  const double t = std::sqrt(t2);
  const Mat3 K = skew(phi);
  double a, b;  // R = I + a K + b K^2
  if (t < kExpTaylor) {
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(t) / t;
    b = (1.0 - std::cos(t)) / t2;
  }
  return Mat3::Identity() + a * K + b * K * K;
}

Vec3 so3_log(const Mat3& R) {
  if ((R * R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
      std::abs(R.determinant() - 1.0) > 1e-6) {
    throw std::invalid_argument("so3_log: input is not a rotation matrix");
  }
  const double c = std::min(1.0, std::max(-1.0, (R.trace() - 1.0) * 0.5));
  const double t = std::acos(c);
  const Vec3 w = 0.5 * unskew(R - R.transpose());  // = sin(t) * axis

  if (t < 1e-6) {
    // sin(t)/t ~ 1 - t^2/6; invert to first order.
    return (1.0 + t * t / 6.0) * w;
  }
  if (t > M_PI - 1e-3) {
    // Axis from the symmetric part: S = cos(t) I + (1 - cos(t)) a a^T.
    const Mat3 S = 0.5 * (R + R.transpose());
    const double den = 1.0 - c;
    int i = 0;
    S.diagonal().maxCoeff(&i);
    Vec3 a;
    a[i] = std::sqrt(std::max(0.0, (S(i, i) - c) / den));
    for (int j = 0; j < 3; ++j) {
      if (j != i) a[j] = S(i, j) / (den * a[i]);
    }
    a.normalize();
    const double sign_dot = w.dot(a);
    if (sign_dot < -1e-12) {
      a = -a;
    } else if (std::abs(sign_dot) <= 1e-12) {
      // Exactly pi: phi and -phi coincide; pick the first nonzero component positive.
      for (int j = 0; j < 3; ++j) {
        if (std::abs(a[j]) > 1e-9) {
          if (a[j] < 0.0) a = -a;
          break;
        }
      }
    }
    return t * a;
  }
  return (t / std::sin(t)) * w;
}

Mat3 so3_right_jacobian(const Vec3& phi) {
  const double t2 = phi.squaredNorm();
  const double t = std::sqrt(t2);
  const Mat3 K = skew(phi);
  if (t < kJacTaylor) {
    return Mat3::Identity() - 0.5 * K + (1.0 / 6.0) * K * K;
  }
  const double a = (1.0 - std::cos(t)) / t2;
  const double b = (t - std::sin(t)) / (t2 * t);
  return Mat3::Identity() - a * K + b * K * K;
}

Mat3 so3_right_jacobian_inv(const Vec3& phi) {
  const double t2 = phi.squaredNorm();
  const double t = std::sqrt(t2);
  const Mat3 K = skew(phi);
  if (t < kJacTaylor) {
    return Mat3::Identity() + 0.5 * K;
  }
  const double s = std::sin(t);
  // (1 + cos t) -> 0 one order faster than sin t at pi; the ratio vanishes there.
  const double c = (std::abs(s) < 1e-12)
                       ? 1.0 / t2
                       : 1.0 / t2 - (1.0 + std::cos(t)) / (2.0 * t * s);
  return Mat3::Identity() + 0.5 * K + c * K * K;
}

Se3 se3_exp(const Vec6& xi) {
  const Vec3 phi = xi.head<3>();
  const Vec3 rho = xi.tail<3>();
  Se3 T;
  T.R = so3_exp(phi);
  T.p = so3_right_jacobian(-phi) * rho;  // left Jacobian
  return T;
}

Vec6 se3_log(const Se3& T) {
  const Vec3 phi = so3_log(T.R);
  Vec6 xi;
  xi.head<3>() = phi;
  xi.tail<3>() = so3_right_jacobian_inv(-phi) * T.p;  // left Jacobian inverse
  return xi;
}

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

Se3 se2_lift(const Se2Pose& pose) {
  Se3 T;
  T.R = so3_exp(Vec3(0.0, 0.0, pose.yaw));
  T.p = Vec3(pose.d.x(), pose.d.y(), 0.0);
  return T;
}

Vec3 yaw_tilt_split(const Mat3& R) {
  const Eigen::Quaterniond q(R);
  const double n = std::sqrt(q.w() * q.w() + q.z() * q.z());
  if (n < 1e-12) {
    // Rotation by pi about an in-plane axis: no yaw component.
    const Vec3 phi = so3_log(R);
    return Vec3(0.0, phi.x(), phi.y());
  }
  const Eigen::Quaterniond twist(q.w() / n, 0.0, 0.0, q.z() / n);
  const double yaw = wrap_angle(2.0 * std::atan2(q.z(), q.w()));
  Eigen::Quaterniond swing = q * twist.conjugate();
  if (swing.w() < 0.0) swing.coeffs() = -swing.coeffs();
  const double sxy = std::hypot(swing.x(), swing.y());
  Vec3 out(yaw, 0.0, 0.0);
  if (sxy > 1e-300) {
    const double ang = 2.0 * std::atan2(sxy, swing.w());
    out.y() = ang * swing.x() / sxy;
    out.z() = ang * swing.y() / sxy;
  }
  return out;
}

}  // namespace se2lio
