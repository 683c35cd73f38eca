#include "se2lio/imu.hpp"

#include <stdexcept>

namespace se2lio {

RobotState midpoint_step(const RobotState& x, const ImuSample& s0, const ImuSample& s1,
                         const Vec3& gravity) {
  const double dt = s1.t - s0.t;
  if (dt <= 0.0) throw std::invalid_argument("midpoint_step: non-increasing stamps");

  const Vec3 w_mid = 0.5 * (s0.w + s1.w) - x.bias.bg;
  RobotState out = x;
  out.t = s1.t;
  out.R = x.R * so3_exp(w_mid * dt);
  const Vec3 a_mid =
      0.5 * (x.R * (s0.a - x.bias.ba) + out.R * (s1.a - x.bias.ba)) + gravity;
  out.p = x.p + x.v * dt + 0.5 * a_mid * dt * dt;
  out.v = x.v + a_mid * dt;
  return out;
}

PreintegratedImu preintegrate(const std::vector<ImuSample>& samples, const ImuBias& bias,
                              const ImuNoiseParams& noise) {
  if (samples.size() < 2) throw std::invalid_argument("preintegrate: need >= 2 samples");
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    if (samples[k + 1].t <= samples[k].t)
      throw std::invalid_argument("preintegrate: stamps not strictly increasing");
  }

  PreintegratedImu pre;
  pre.t_i = samples.front().t;
  pre.t_j = samples.back().t;
  pre.dt = pre.t_j - pre.t_i;
  pre.bias_lin = bias;
  pre.nodes.reserve(samples.size());
  pre.nodes.push_back({pre.t_i, Mat3::Identity(), Vec3::Zero(), Vec3::Zero()});

  Mat15 A = Mat15::Identity();  // accumulated state transition

  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const ImuSample& s0 = samples[k];
    const ImuSample& s1 = samples[k + 1];
    const double dt = s1.t - s0.t;

    const Vec3 w_mid = 0.5 * (s0.w + s1.w) - bias.bg;
    const Vec3 a0 = s0.a - bias.ba;
    const Vec3 a1 = s1.a - bias.ba;

    const Mat3 R0 = pre.delta_R;
    const Mat3 gamma = so3_exp(w_mid * dt);
    const Mat3 jr = so3_right_jacobian(w_mid * dt);
    const Mat3 R1 = R0 * gamma;

    const Vec3 a_mid = 0.5 * (R0 * a0 + R1 * a1);

    // Error dynamics (right rotation convention):
    //   dphi' = gamma^T dphi - jr dt (db_g + n_g_mid)
    //   da    = M dphi + N_ba db_a + N_bg db_g + accel/gyro white terms
    const Mat3 M = -0.5 * (R0 * skew(a0) + R1 * skew(a1) * gamma.transpose());
    const Mat3 Nbg = 0.5 * R1 * skew(a1) * jr * dt;
    const Mat3 Nba = -0.5 * (R0 + R1);

    Mat15 F = Mat15::Identity();
    F.block<3, 3>(0, 0) = gamma.transpose();
    F.block<3, 3>(0, 12) = -jr * dt;
    F.block<3, 3>(3, 0) = 0.5 * M * dt * dt;
    F.block<3, 3>(3, 6) = Mat3::Identity() * dt;
    F.block<3, 3>(3, 9) = 0.5 * Nba * dt * dt;
    F.block<3, 3>(3, 12) = 0.5 * Nbg * dt * dt;
    F.block<3, 3>(6, 0) = M * dt;
    F.block<3, 3>(6, 9) = Nba * dt;
    F.block<3, 3>(6, 12) = Nbg * dt;

    // Noise order: [n_g0, n_a0, n_g1, n_a1, n_bwa, n_bwg].
    Eigen::Matrix<double, 15, 18> G = Eigen::Matrix<double, 15, 18>::Zero();
    const Mat3 dphi_g = -0.5 * jr * dt;
    const Mat3 da_g = 0.25 * R1 * skew(a1) * jr * dt;
    const Mat3 da_a0 = -0.5 * R0;
    const Mat3 da_a1 = -0.5 * R1;
    G.block<3, 3>(0, 0) = dphi_g;
    G.block<3, 3>(0, 6) = dphi_g;
    G.block<3, 3>(3, 0) = 0.5 * da_g * dt * dt;
    G.block<3, 3>(3, 3) = 0.5 * da_a0 * dt * dt;
    G.block<3, 3>(3, 6) = 0.5 * da_g * dt * dt;
    G.block<3, 3>(3, 9) = 0.5 * da_a1 * dt * dt;
    G.block<3, 3>(6, 0) = da_g * dt;
    G.block<3, 3>(6, 3) = da_a0 * dt;
    G.block<3, 3>(6, 6) = da_g * dt;
    G.block<3, 3>(6, 9) = da_a1 * dt;
    G.block<3, 3>(9, 12) = Mat3::Identity();
    G.block<3, 3>(12, 15) = Mat3::Identity();

    Eigen::Matrix<double, 18, 1> q;
    const double wn = noise.sigma_g * noise.sigma_g / dt;
    const double an = noise.sigma_a * noise.sigma_a / dt;
    q << wn, wn, wn, an, an, an, wn, wn, wn, an, an, an,
        noise.sigma_ba * noise.sigma_ba * dt, noise.sigma_ba * noise.sigma_ba * dt,
        noise.sigma_ba * noise.sigma_ba * dt, noise.sigma_bg * noise.sigma_bg * dt,
        noise.sigma_bg * noise.sigma_bg * dt, noise.sigma_bg * noise.sigma_bg * dt;

    pre.cov = F * pre.cov * F.transpose() + G * q.asDiagonal() * G.transpose();
    A = F * A;

    pre.delta_p += pre.delta_v * dt + 0.5 * a_mid * dt * dt;
    pre.delta_v += a_mid * dt;
    pre.delta_R = R1;
    pre.nodes.push_back({s1.t, pre.delta_R, pre.delta_p, pre.delta_v});
  }

  pre.j_r_bg = A.block<3, 3>(0, 12);
  pre.j_p_ba = A.block<3, 3>(3, 9);
  pre.j_p_bg = A.block<3, 3>(3, 12);
  pre.j_v_ba = A.block<3, 3>(6, 9);
  pre.j_v_bg = A.block<3, 3>(6, 12);
  return pre;
}

CorrectedDeltas correct_bias(const PreintegratedImu& pre, const ImuBias& bias) {
  const Vec3 dba = bias.ba - pre.bias_lin.ba;
  const Vec3 dbg = bias.bg - pre.bias_lin.bg;
  CorrectedDeltas out;
  out.delta_R = pre.delta_R * so3_exp(pre.j_r_bg * dbg);
  out.delta_p = pre.delta_p + pre.j_p_ba * dba + pre.j_p_bg * dbg;
  out.delta_v = pre.delta_v + pre.j_v_ba * dba + pre.j_v_bg * dbg;
  return out;
}

Vec15 imu_residual(const PreintegratedImu& pre, const RobotState& xi, const RobotState& xj,
                   const Vec3& gravity) {
  const double dt = pre.dt;
  const CorrectedDeltas d = correct_bias(pre, xi.bias);
  Vec15 r;
  r.segment<3>(0) = so3_log(d.delta_R.transpose() * xi.R.transpose() * xj.R);
  r.segment<3>(3) =
      xi.R.transpose() * (xj.p - xi.p - xi.v * dt - 0.5 * gravity * dt * dt) - d.delta_p;
  r.segment<3>(6) = xi.R.transpose() * (xj.v - xi.v - gravity * dt) - d.delta_v;
  r.segment<3>(9) = xj.bias.ba - xi.bias.ba;
  r.segment<3>(12) = xj.bias.bg - xi.bias.bg;
  return r;
}

Eigen::Matrix<double, 15, 30> imu_jacobian(const PreintegratedImu& pre, const RobotState& xi,
                                           const RobotState& xj, const Vec3& gravity) {
  const double dt = pre.dt;
  const Vec3 dbg = xi.bias.bg - pre.bias_lin.bg;
  const CorrectedDeltas d = correct_bias(pre, xi.bias);

  const Mat3 Ri_t = xi.R.transpose();
  const Mat3 E = d.delta_R.transpose() * Ri_t * xj.R;  // exp(r_phi^)
  const Vec3 r_phi = so3_log(E);
  const Mat3 jr_inv = so3_right_jacobian_inv(r_phi);

  const Vec3 qp = Ri_t * (xj.p - xi.p - xi.v * dt - 0.5 * gravity * dt * dt);
  const Vec3 qv = Ri_t * (xj.v - xi.v - gravity * dt);

  Eigen::Matrix<double, 15, 30> J = Eigen::Matrix<double, 15, 30>::Zero();

  // r_phi row. The gyro-bias block carries the exact composition factor
  // J_r(j_r_bg dbg); it reduces to identity at dbg = 0.
  J.block<3, 3>(0, 0) = -jr_inv * xj.R.transpose() * xi.R;
  J.block<3, 3>(0, 12) =
      -jr_inv * E.transpose() * so3_right_jacobian(pre.j_r_bg * dbg) * pre.j_r_bg;
  J.block<3, 3>(0, 15) = jr_inv;

  // r_p row.
  J.block<3, 3>(3, 0) = skew(qp);
  J.block<3, 3>(3, 3) = -Ri_t;
  J.block<3, 3>(3, 6) = -Ri_t * dt;
  J.block<3, 3>(3, 9) = -pre.j_p_ba;
  J.block<3, 3>(3, 12) = -pre.j_p_bg;
  J.block<3, 3>(3, 18) = Ri_t;

  // r_v row.
  J.block<3, 3>(6, 0) = skew(qv);
  J.block<3, 3>(6, 6) = -Ri_t;
  J.block<3, 3>(6, 9) = -pre.j_v_ba;
  J.block<3, 3>(6, 12) = -pre.j_v_bg;
  J.block<3, 3>(6, 21) = Ri_t;

  // Bias random-walk rows.
  J.block<3, 3>(9, 9) = -Mat3::Identity();
  J.block<3, 3>(9, 24) = Mat3::Identity();
  J.block<3, 3>(12, 12) = -Mat3::Identity();
  J.block<3, 3>(12, 27) = Mat3::Identity();
  return J;
}

RobotState predict(const PreintegratedImu& pre, const RobotState& xi, const Vec3& gravity) {
  const CorrectedDeltas d = correct_bias(pre, xi.bias);
  const double dt = pre.dt;
  RobotState xj = xi;
  xj.t = pre.t_j;
  xj.R = xi.R * d.delta_R;
  xj.p = xi.p + xi.v * dt + 0.5 * gravity * dt * dt + xi.R * d.delta_p;
  xj.v = xi.v + gravity * dt + xi.R * d.delta_v;
  return xj;
}

}  // namespace se2lio
