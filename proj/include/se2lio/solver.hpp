#pragma once

// Scan-to-map registration with SE(2)-parameterized poses.
//
// Point residuals are the usual point-to-line and point-to-plane distances,
// but each correspondence is weighted by the variance that out-of-plane pose
// perturbations induce on it:
//   sigma_L = J_eta_theta Lam12 Sigma_theta (J_eta_theta Lam12)^T
//           + sigma_z^2 J_eta_z^2 + sigma_k^2
// where eta_theta is a small rotation about the in-plane axes (applied on the
// right of R), eta_z a vertical shift, and Lam12 = [e1 e2] selects the two
// in-plane rotation axes. Correspondences that move a lot under tilt or lift
// (far points, horizontal surfaces) carry less weight.

#include <optional>
#include <vector>

#include "se2lio/imu.hpp"
#include "se2lio/map.hpp"
#include "se2lio/scan.hpp"

namespace se2lio {

struct PerturbationModel {
  Mat2 sigma_theta_xy = 1e-3 * Mat2::Identity();  // rad^2
  double sigma_z = 0.05;                          // m (std)
  double sigma_k = 0.05;                          // m (std), intrinsic term

  static PerturbationModel zero() { return {Mat2::Zero(), 0.0, 0.05}; }
};

struct EdgeCorrespondence {
  Vec3 p;     // feature point, body frame
  Vec3 a, b;  // map points spanning the line
};

struct PlaneCorrespondence {
  Vec3 p;        // feature point, body frame
  Vec3 a, b, c;  // map points spanning the plane
};

Vec3 transform_point(const Se2Pose& pose, const Vec3& p);

// Point-to-line distance |(p_hat - b) x (p_hat - a)| / |a - b|.
double edge_residual(const Se2Pose& pose, const EdgeCorrespondence& corr);

// Point-to-plane distance |(p_hat - a)^T n|, n the unit normal of (a, b, c).
double plane_residual(const Se2Pose& pose, const PlaneCorrespondence& corr);

// d(T p)/d(dx, dy, yaw): columns e1, e2, -R skew(p) e3.
Mat3 pose_jacobian(const Se2Pose& pose, const Vec3& p);

// Chain rule rows d f / d(dx, dy, yaw). Zero rows at the residual kink
// (residual below 1e-9).
Eigen::RowVector3d edge_jacobian(const Se2Pose& pose, const EdgeCorrespondence& corr);
Eigen::RowVector3d plane_jacobian(const Se2Pose& pose, const PlaneCorrespondence& corr);

// Sensitivity of a residual to the out-of-plane perturbation: j_theta is the
// row d f / d eta (right perturbation of R), j_z the scalar d f / d eta_z.
struct PerturbationJacobian {
  Eigen::RowVector3d j_theta = Eigen::RowVector3d::Zero();
  double j_z = 0.0;
};
PerturbationJacobian edge_perturbation_jacobian(const Se2Pose& pose,
                                                const EdgeCorrespondence& corr);
PerturbationJacobian plane_perturbation_jacobian(const Se2Pose& pose,
                                                 const PlaneCorrespondence& corr);

double lidar_noise_variance(const PerturbationJacobian& j, const PerturbationModel& model);

struct SolverConfig {
  int max_iterations = 30;
  double update_tolerance = 1e-4;
  int min_correspondences = 10;
  bool huber = false;
  double huber_delta = 0.1;
  double max_condition = 1e12;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
};

// Frame i of the preintegration factor; held fixed during the solve.
struct ImuFactor {
  PreintegratedImu pre;
  RobotState state_i;
};

struct SolveResult {
  RobotState state;
  Se2Pose pose;
  bool converged = false;
  bool degenerate = false;   // too few correspondences, state left at the prior
  bool regularized = false;  // normal matrix needed a diagonal bump
  int iterations = 0;
  int edge_matches = 0;
  int plane_matches = 0;
  std::vector<double> cost_history;
};

// Gauss-Newton MAP estimate of frame j. Without an IMU factor the parameters
// are (dx, dy, yaw); with one, the full 15-dof state of frame j is estimated
// (frame i stays fixed) and weak zero-priors with the perturbation model's
// sigmas keep roll/pitch/z from drifting where only the IMU observes them.
// Correspondences are re-searched from the map every iteration.
SolveResult estimate(const FeatureScan& features, FeatureMap& map,
                     const std::optional<ImuFactor>& imu, const RobotState& init,
                     const PerturbationModel& model, const SolverConfig& cfg);

}  // namespace se2lio
