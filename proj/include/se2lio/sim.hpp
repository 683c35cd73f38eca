#pragma once

// Synthetic worlds, trajectories, IMU streams and LiDAR sweeps with exact
// ground truth. Everything is seeded and deterministic.
//
// Trajectories are cubic splines through timed SE(2) waypoints, with an
// out-of-plane perturbation process (per-frame normal draws, splined to keep
// the motion differentiable) composed on top:
//   R(t) = exp([eta_xy(t); 0]^) Rz(yaw(t)),  p(t) = [x(t), y(t), eta_z(t)].
// IMU synthesis differentiates the splines analytically and runs the sensor
// model forward, so preintegrating the samples reproduces the trajectory.

#include <cstdint>
#include <random>
#include <vector>

#include "se2lio/imu.hpp"
#include "se2lio/scan.hpp"

namespace se2lio {

struct PlanePrimitive {
  Vec3 center;
  Vec3 u_axis, v_axis;  // unit, orthogonal, span the rectangle
  double half_u, half_v;

  Vec3 normal() const { return u_axis.cross(v_axis); }
};

struct EdgePrimitive {
  Vec3 a, b;

  double distance(const Vec3& p) const;
};

struct SyntheticWorld {
  std::vector<PlanePrimitive> planes;
  std::vector<EdgePrimitive> edges;
};

struct PillarSpec {
  double cx = 0.0, cy = 0.0;
  double half_x = 0.25, half_y = 0.25;
  double height = 1.8;
};

// Axis-aligned room centered on the origin. The floor sits at -sensor_height
// so the vehicle plane is z = 0. Edge primitives cover wall/wall, wall/floor,
// wall/ceiling and pillar intersection lines.
SyntheticWorld make_box_world(double size_x, double size_y, double height, double sensor_height,
                              const std::vector<PillarSpec>& pillars);

// 1-D cubic spline interpolation with optional clamped end slopes.
class CubicSpline {
 public:
  void build(std::vector<double> t, std::vector<double> y, const double* slope0 = nullptr,
             const double* slope1 = nullptr);
  double eval(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;
  bool empty() const { return t_.empty(); }

 private:
  std::size_t interval(double t) const;
  std::vector<double> t_, y_, b_, c_, d_;  // y + b dt + c dt^2 + d dt^3
};

struct PerturbationSpec {
  double theta_var = 0.0;  // rad^2, isotropic over the two in-plane axes
  double z_sigma = 0.0;    // m
};

struct TrajectorySpec {
  std::vector<Vec3> waypoints;  // (x, y, yaw)
  double speed = 1.0;           // m/s along the path
  double ramp_time = 0.0;       // accelerate from rest over this long
  double hold_duration = 5.0;   // used when the path has no length
  double sweep_rate = 10.0;     // Hz; perturbation knots live on this grid
  double imu_rate = 200.0;      // Hz
  PerturbationSpec perturbation;
  uint64_t seed = 1;
};

class ContinuousTrajectory {
 public:
  static ContinuousTrajectory generate(const TrajectorySpec& spec);

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }

  Se3 pose(double t) const;
  Vec3 body_angular_velocity(double t) const;
  Vec3 world_velocity(double t) const;
  Vec3 world_accel(double t) const;

 private:
  double t_begin_ = 0.0, t_end_ = 0.0;
  CubicSpline x_, y_, yaw_;
  CubicSpline eta_x_, eta_y_, eta_z_;  // empty when the process is off
  bool perturbed_ = false;
};

std::vector<std::pair<double, Se3>> sample_poses(const ContinuousTrajectory& traj, double rate);

// Forward sensor model on the IMU grid. sigma==0 entries are noiseless; the
// bias random walk is likewise driven by the configured densities.
std::vector<ImuSample> synth_imu(const ContinuousTrajectory& traj, double rate,
                                 const ImuNoiseParams& noise, const ImuBias& bias_start,
                                 const Vec3& gravity, uint64_t seed);

struct LidarSpec {
  int rings = 16;
  double elev_min_deg = -15.0;
  double elev_max_deg = 15.0;
  int points_per_ring = 720;
  double min_range = 0.1;
  double max_range = 100.0;
  double range_sigma = 0.0;  // m, along-ray
  double sweep_period = 0.1;
};

// One sweep ending at t_end. With distort=true each azimuth column is cast
// from the instantaneous trajectory pose, which bakes motion distortion into
// the scan; otherwise everything is cast from the pose at t_end. rel_time is
// the azimuth fraction of the sweep.
RawScan synth_scan(const SyntheticWorld& world, const ContinuousTrajectory& traj, double t_end,
                   const LidarSpec& spec, bool distort, std::mt19937_64& rng);

// Static variant: single capture pose, no trajectory needed.
RawScan synth_scan_static(const SyntheticWorld& world, const Se3& pose, double stamp,
                          const LidarSpec& spec, std::mt19937_64& rng);

}  // namespace se2lio
