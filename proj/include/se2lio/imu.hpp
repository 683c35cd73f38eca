#pragma once

// IMU model, mid-point integration and preintegration.
//
// Measurement model: w_hat = w + b_g + n_g,  a_hat = R^T (a - g) + b_a + n_a
// with R the world-from-body rotation, a the world-frame acceleration and g
// the world gravity vector (typically (0,0,-9.81)).
//
// Error-state order everywhere: [dphi, dP, dV, db_a, db_g], right perturbation
// on rotations (R <- R exp(dphi^)), additive on the rest.

#include <optional>
#include <vector>

#include "se2lio/lie.hpp"

namespace se2lio {

using Mat15 = Eigen::Matrix<double, 15, 15>;
using Vec15 = Eigen::Matrix<double, 15, 1>;

struct ImuSample {
  double t = 0.0;
  Vec3 w = Vec3::Zero();  // rad/s
  Vec3 a = Vec3::Zero();  // m/s^2
};

struct ImuBias {
  Vec3 ba = Vec3::Zero();
  Vec3 bg = Vec3::Zero();
};

// Continuous-time noise densities; squared per-sample variance is sigma^2/dt
// for the white terms and sigma^2*dt for the bias random walks.
struct ImuNoiseParams {
  double sigma_g = 1.7e-4;   // rad/s/sqrt(Hz)
  double sigma_a = 2.0e-3;   // m/s^2/sqrt(Hz)
  double sigma_bg = 1.0e-5;  // rad/s^2/sqrt(Hz)
  double sigma_ba = 1.0e-4;  // m/s^3/sqrt(Hz)
};

struct RobotState {
  double t = 0.0;
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  ImuBias bias;

  Se3 pose() const { return {R, p}; }
};

// One mid-point step of the world-frame kinematics. Rotation integrates first;
// the second accelerometer sample is rotated by the fresh attitude.
RobotState midpoint_step(const RobotState& x, const ImuSample& s0, const ImuSample& s1,
                         const Vec3& gravity);

// Gravity-free deltas between two stamps, linearized at a fixed bias.
// delta_R, delta_p, delta_v follow the identities
//   delta_R = R_i^T R_j
//   delta_p = R_i^T (P_j - P_i - V_i dt - 1/2 g dt^2)
//   delta_v = R_i^T (V_j - V_i - g dt)
// cov is the 15x15 covariance of [dphi, dP, dV, db_a, db_g]; the bias blocks
// of the accumulated state transition provide first-order bias sensitivities.
struct PreintegratedImu {
  double t_i = 0.0, t_j = 0.0;
  double dt = 0.0;
  Mat3 delta_R = Mat3::Identity();
  Vec3 delta_p = Vec3::Zero();
  Vec3 delta_v = Vec3::Zero();
  Mat15 cov = Mat15::Zero();
  ImuBias bias_lin;

  Mat3 j_r_bg = Mat3::Zero();  // d dphi / d b_g
  Mat3 j_p_ba = Mat3::Zero();
  Mat3 j_p_bg = Mat3::Zero();
  Mat3 j_v_ba = Mat3::Zero();
  Mat3 j_v_bg = Mat3::Zero();

  // Per-sample relative states, for interpolating motion inside the interval.
  struct Node {
    double t;
    Mat3 dR;
    Vec3 dp;
    Vec3 dv;
  };
  std::vector<Node> nodes;
};

// samples must have strictly increasing stamps, size >= 2.
PreintegratedImu preintegrate(const std::vector<ImuSample>& samples, const ImuBias& bias,
                              const ImuNoiseParams& noise);

struct CorrectedDeltas {
  Mat3 delta_R;
  Vec3 delta_p;
  Vec3 delta_v;
};

// First-order update of the deltas to a new bias (exp on the right for the
// rotation part).
CorrectedDeltas correct_bias(const PreintegratedImu& pre, const ImuBias& bias);

// 15-vector residual [r_phi, r_p, r_v, r_ba, r_bg] between two states, with
// the deltas corrected to state_i's bias.
Vec15 imu_residual(const PreintegratedImu& pre, const RobotState& xi, const RobotState& xj,
                   const Vec3& gravity);

// 15x30 Jacobian of imu_residual w.r.t.
// [dphi_i, dP_i, dV_i, db_a,i, db_g,i, dphi_j, dP_j, dV_j, db_a,j, db_g,j].
Eigen::Matrix<double, 15, 30> imu_jacobian(const PreintegratedImu& pre, const RobotState& xi,
                                           const RobotState& xj, const Vec3& gravity);

// Propagates state_i through the (bias-corrected) deltas, re-adding gravity.
RobotState predict(const PreintegratedImu& pre, const RobotState& xi, const Vec3& gravity);

}  // namespace se2lio
