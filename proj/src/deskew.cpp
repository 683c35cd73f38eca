#include "se2lio/deskew.hpp"

#include <algorithm>
#include <stdexcept>

namespace se2lio {

SweepMotion SweepMotion::from_preintegration(const PreintegratedImu& pre,
                                             const RobotState& state0, const Vec3& gravity,
                                             double t0, double t1) {
  constexpr double kSlack = 1e-6;
  if (pre.t_i > t0 + kSlack || pre.t_j < t1 - kSlack || pre.nodes.size() < 2)
    throw std::invalid_argument("SweepMotion: preintegration does not cover the sweep");
  SweepMotion m;
  m.t0_ = t0;
  m.t1_ = t1;
  m.from_imu_ = true;
  m.nodes_ = pre.nodes;
  m.R0_t_ = state0.R.transpose();
  m.v0_ = state0.v;
  m.gravity_ = gravity;
  return m;
}

SweepMotion SweepMotion::constant_twist(const Vec6& xi, double t0, double t1) {
  SweepMotion m;
  m.t0_ = t0;
  m.t1_ = t1;
  m.xi_ = xi;
  return m;
}

Se3 SweepMotion::rel_pose(double t) const {
  const double tau = t - t0_;
  if (!from_imu_) {
    const double span = t1_ - t0_;
    const double s = span > 0.0 ? tau / span : 0.0;
    return se3_exp(s * xi_);
  }

  // Bracketing preintegration nodes; clamp to the covered interval.
  const double tc = std::clamp(t, nodes_.front().t, nodes_.back().t);
  std::size_t hi = 1;
  while (hi + 1 < nodes_.size() && nodes_[hi].t < tc) ++hi;
  const auto& a = nodes_[hi - 1];
  const auto& b = nodes_[hi];
  const double span = b.t - a.t;
  const double alpha = span > 0.0 ? (tc - a.t) / span : 0.0;

  Se3 rel;
  rel.R = a.dR * so3_exp(alpha * so3_log(a.dR.transpose() * b.dR));
  const Vec3 dp = (1.0 - alpha) * a.dp + alpha * b.dp;
  // World motion in the start body frame: velocity and gravity terms plus the
  // gravity-free preintegrated displacement.
  rel.p = R0_t_ * (v0_ * tau + 0.5 * gravity_ * tau * tau) + dp;
  return rel;
}

void deskew_first_stage(std::vector<ScanPoint>& points, const SweepMotion& motion) {
  const double t0 = motion.t0();
  const double span = motion.t1() - motion.t0();
  for (ScanPoint& pt : points) {
    const Se3 rel = motion.rel_pose(t0 + static_cast<double>(pt.rel_time) * span);
    pt.p = rel.act(pt.p);
  }
}

void deskew_second_stage(std::vector<ScanPoint>& points, const Se3& Ta, const Se3& Tb) {
  const Vec6 dxi = se3_log(Ta.inverse() * Tb);
  for (ScanPoint& pt : points) {
    const double s = static_cast<double>(pt.rel_time);
    pt.p = se3_exp((1.0 - s) * dxi).act(pt.p);
  }
}

}  // namespace se2lio
