#pragma once

// Motion distortion correction.
//
// Stage one runs before optimization: per-point relative motion comes from the
// IMU preintegration over the sweep (cached per-sample states, tangent-space
// interpolation in between), or from a constant-twist fallback when IMU
// coverage is missing. Points end up expressed in the sweep-start frame.
//
// Stage two runs after optimization and re-computes the correction from the
// optimized poses: each point is transformed by exp((1 - s) * log(Ta^-1 Tb))
// with s the point's relative timestamp.

#include <vector>

#include "se2lio/imu.hpp"
#include "se2lio/scan.hpp"

namespace se2lio {

// Relative body motion over one sweep [t0, t1]: rel_pose(t) maps coordinates
// of the body frame at time t into the body frame at t0.
class SweepMotion {
 public:
  // From preintegrated IMU covering the sweep. state0 provides the velocity
  // and attitude at t0 (gravity re-enters through them). Throws if the
  // preintegration does not cover [t0, t1] (small slack for sample jitter).
  static SweepMotion from_preintegration(const PreintegratedImu& pre, const RobotState& state0,
                                         const Vec3& gravity, double t0, double t1);

  // Constant twist over the sweep: xi is the full-sweep tangent (e.g. scaled
  // from the previous inter-scan motion).
  static SweepMotion constant_twist(const Vec6& xi, double t0, double t1);

  Se3 rel_pose(double t) const;
  Se3 end_pose() const { return rel_pose(t1_); }
  double t0() const { return t0_; }
  double t1() const { return t1_; }

 private:
  SweepMotion() = default;

  double t0_ = 0.0, t1_ = 0.0;
  // IMU path.
  bool from_imu_ = false;
  std::vector<PreintegratedImu::Node> nodes_;
  Mat3 R0_t_ = Mat3::Identity();  // state0.R^T
  Vec3 v0_ = Vec3::Zero();
  Vec3 gravity_ = Vec3::Zero();
  // Constant-twist path.
  Vec6 xi_ = Vec6::Zero();
};

// Expresses every point in the sweep-start frame. rel_time indexes into the
// motion model; the scan is modified in place.
void deskew_first_stage(std::vector<ScanPoint>& points, const SweepMotion& motion);

// Re-computed correction from optimized poses Ta (previous scan) and Tb
// (current scan): p <- exp((1 - rel_time) * log(Ta^-1 Tb)) p.
void deskew_second_stage(std::vector<ScanPoint>& points, const Se3& Ta, const Se3& Tb);

}  // namespace se2lio
