#include "se2lio/solver.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "se2lio/threading.hpp"

namespace se2lio {

namespace {

constexpr double kResidualKink = 1e-9;
constexpr double kDegenerateSpan = 1e-6;
// Floor added to prior variances; a zeroed perturbation model then acts as a
// hard planarity constraint instead of dividing by zero.
constexpr double kVarianceFloor = 1e-12;

// f and df/d(p_hat) of the point-to-line distance. Returns false at the kink.
bool edge_gradient(const Vec3& p_hat, const EdgeCorrespondence& c, double& f,
                   Eigen::RowVector3d& dfdp) {
  const Vec3 ab = c.a - c.b;
  const double lab = ab.norm();
  const Vec3 u = (p_hat - c.b).cross(p_hat - c.a);
  f = u.norm() / lab;
  if (f < kResidualKink) {
    dfdp.setZero();
    return false;
  }
  dfdp = (u / u.norm()).transpose() * skew(ab) / lab;
  return true;
}

bool plane_gradient(const Vec3& p_hat, const PlaneCorrespondence& c, double& f,
                    Eigen::RowVector3d& dfdp) {
  const Vec3 n = (c.a - c.b).cross(c.c - c.a);
  const Vec3 nhat = n / n.norm();
  const double s = (p_hat - c.a).dot(nhat);
  f = std::abs(s);
  if (f < kResidualKink) {
    dfdp.setZero();
    return false;
  }
  dfdp = (s > 0.0 ? 1.0 : -1.0) * nhat.transpose();
  return true;
}

}  // namespace

Vec3 transform_point(const Se2Pose& pose, const Vec3& p) { return se2_lift(pose).act(p); }

double edge_residual(const Se2Pose& pose, const EdgeCorrespondence& corr) {
  const Vec3 p_hat = transform_point(pose, corr.p);
  return (p_hat - corr.b).cross(p_hat - corr.a).norm() / (corr.a - corr.b).norm();
}

double plane_residual(const Se2Pose& pose, const PlaneCorrespondence& corr) {
  const Vec3 n = (corr.a - corr.b).cross(corr.c - corr.a);
  const Vec3 p_hat = transform_point(pose, corr.p);
  return std::abs((p_hat - corr.a).dot(n / n.norm()));
}

Mat3 pose_jacobian(const Se2Pose& pose, const Vec3& p) {
  const Mat3 R = se2_lift(pose).R;
  Mat3 J;
  J.col(0) = Vec3::UnitX();
  J.col(1) = Vec3::UnitY();
  J.col(2) = -R * skew(p) * Vec3::UnitZ();
  return J;
}

Eigen::RowVector3d edge_jacobian(const Se2Pose& pose, const EdgeCorrespondence& corr) {
  double f;
  Eigen::RowVector3d dfdp;
  if (!edge_gradient(transform_point(pose, corr.p), corr, f, dfdp))
    return Eigen::RowVector3d::Zero();
  return dfdp * pose_jacobian(pose, corr.p);
}

Eigen::RowVector3d plane_jacobian(const Se2Pose& pose, const PlaneCorrespondence& corr) {
  double f;
  Eigen::RowVector3d dfdp;
  if (!plane_gradient(transform_point(pose, corr.p), corr, f, dfdp))
    return Eigen::RowVector3d::Zero();
  return dfdp * pose_jacobian(pose, corr.p);
}

namespace {

PerturbationJacobian perturbation_from_gradient(const Se2Pose& pose, const Vec3& p,
                                                const Eigen::RowVector3d& dfdp) {
  const Mat3 R = se2_lift(pose).R;
  PerturbationJacobian j;
  j.j_theta = dfdp * (-R * skew(p));
  j.j_z = dfdp * Vec3::UnitZ();
  return j;
}

}  // namespace

PerturbationJacobian edge_perturbation_jacobian(const Se2Pose& pose,
                                                const EdgeCorrespondence& corr) {
  double f;
  Eigen::RowVector3d dfdp;
  edge_gradient(transform_point(pose, corr.p), corr, f, dfdp);
  return perturbation_from_gradient(pose, corr.p, dfdp);
}

PerturbationJacobian plane_perturbation_jacobian(const Se2Pose& pose,
                                                 const PlaneCorrespondence& corr) {
  double f;
  Eigen::RowVector3d dfdp;
  plane_gradient(transform_point(pose, corr.p), corr, f, dfdp);
  return perturbation_from_gradient(pose, corr.p, dfdp);
}

double lidar_noise_variance(const PerturbationJacobian& j, const PerturbationModel& model) {
  const Eigen::RowVector2d jt(j.j_theta[0], j.j_theta[1]);  // Lam12 projection
  return jt * model.sigma_theta_xy * jt.transpose() + model.sigma_z * model.sigma_z * j.j_z * j.j_z +
         model.sigma_k * model.sigma_k;
}

SolveResult estimate(const FeatureScan& features, FeatureMap& map,
                     const std::optional<ImuFactor>& imu, const RobotState& init,
                     const PerturbationModel& model, const SolverConfig& cfg) {
  SolveResult res;
  res.state = init;
  const bool full = imu.has_value();
  const int n = full ? 15 : 3;

  Mat15 imu_info = Mat15::Zero();
  if (full) {
    imu_info = imu->pre.cov.ldlt().solve(Mat15::Identity());
  }
  const Mat2 w_tilt =
      (model.sigma_theta_xy + kVarianceFloor * Mat2::Identity()).inverse().eval();
  const double w_z = 1.0 / (model.sigma_z * model.sigma_z + kVarianceFloor);

  map.prepare();
  const double max_dist = map.config().max_correspondence_dist;

  struct EdgeSlot {
    bool valid = false;
    EdgeCorrespondence c;
  };
  struct PlaneSlot {
    bool valid = false;
    PlaneCorrespondence c;
  };
  std::vector<EdgeSlot> edge_slots(features.edges.size());
  std::vector<PlaneSlot> plane_slots(features.planars.size());

  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd g(n);

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const Vec3 yt = yaw_tilt_split(res.state.R);
    const Se2Pose pose{wrap_angle(yt[0]), res.state.p.head<2>()};
    const Se3 T = se2_lift(pose);

    // Correspondence search: workers fill disjoint slots, so the result is
    // independent of the thread count.
    parallel_for(features.edges.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        EdgeSlot& slot = edge_slots[i];
        slot.valid = false;
        const Vec3 p_hat = T.act(features.edges[i].p);
        const auto hits = map.edge_tree().knn(p_hat, 2, max_dist);
        if (hits.size() < 2) continue;
        const Vec3& a = map.edge_snapshot()[hits[0].index];
        const Vec3& bpt = map.edge_snapshot()[hits[1].index];
        if ((a - bpt).norm() < kDegenerateSpan) continue;
        slot.c = {features.edges[i].p, a, bpt};
        slot.valid = true;
      }
    });
    parallel_for(features.planars.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        PlaneSlot& slot = plane_slots[i];
        slot.valid = false;
        const Vec3 p_hat = T.act(features.planars[i].p);
        const auto hits = map.plane_tree().knn(p_hat, 3, max_dist);
        if (hits.size() < 3) continue;
        const Vec3& a = map.plane_snapshot()[hits[0].index];
        const Vec3& bpt = map.plane_snapshot()[hits[1].index];
        const Vec3& c = map.plane_snapshot()[hits[2].index];
        if ((a - bpt).cross(c - a).norm() < kDegenerateSpan) continue;
        slot.c = {features.planars[i].p, a, bpt, c};
        slot.valid = true;
      }
    });

    int n_edge = 0, n_plane = 0;
    for (const auto& s : edge_slots) n_edge += s.valid;
    for (const auto& s : plane_slots) n_plane += s.valid;
    res.edge_matches = n_edge;
    res.plane_matches = n_plane;

    if (n_edge + n_plane < cfg.min_correspondences) {
      res.degenerate = true;
      res.converged = false;
      break;
    }

    H.setZero();
    g.setZero();
    double cost = 0.0;

    auto add_row = [&](const Vec3& p, double f, const Eigen::RowVector3d& dfdp) {
      const Eigen::RowVector3d j3 = dfdp * pose_jacobian(pose, p);
      const PerturbationJacobian pj = perturbation_from_gradient(pose, p, dfdp);
      double w = 1.0 / lidar_noise_variance(pj, model);
      if (cfg.huber && f > cfg.huber_delta) w *= cfg.huber_delta / f;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      if (full) {
        row(2) = j3(2);  // yaw lives in dphi_z
        row(3) = j3(0);
        row(4) = j3(1);
      } else {
        row = j3;
      }
      H.noalias() += w * row.transpose() * row;
      g.noalias() += w * row.transpose() * f;
      cost += w * f * f;
    };

    for (const auto& s : edge_slots) {
      if (!s.valid) continue;
      double f;
      Eigen::RowVector3d dfdp;
      if (!edge_gradient(T.act(s.c.p), s.c, f, dfdp)) continue;
      add_row(s.c.p, f, dfdp);
    }
    for (const auto& s : plane_slots) {
      if (!s.valid) continue;
      double f;
      Eigen::RowVector3d dfdp;
      if (!plane_gradient(T.act(s.c.p), s.c, f, dfdp)) continue;
      add_row(s.c.p, f, dfdp);
    }

    if (full) {
      const Vec15 r = imu_residual(imu->pre, imu->state_i, res.state, cfg.gravity);
      const Eigen::Matrix<double, 15, 15> Jj =
          imu_jacobian(imu->pre, imu->state_i, res.state, cfg.gravity).block<15, 15>(0, 15);
      H.noalias() += Jj.transpose() * imu_info * Jj;
      g.noalias() += Jj.transpose() * imu_info * r;
      cost += r.dot(imu_info * r);

      // Weak zero-priors on the out-of-plane state components.
      const Vec2 tilt(yt[1], yt[2]);
      Eigen::Matrix<double, 2, 3> jt;
      jt << T.R.row(0), T.R.row(1);  // d tilt / d dphi = Lam12^T Rz(yaw)
      H.block<3, 3>(0, 0) += jt.transpose() * w_tilt * jt;
      g.head<3>() += jt.transpose() * w_tilt * tilt;
      cost += tilt.dot(w_tilt * tilt);
      const double pz = res.state.p.z();
      H(5, 5) += w_z;
      g(5) += w_z * pz;
      cost += w_z * pz * pz;
    }

    res.cost_history.push_back(cost);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (lmin <= 0.0 || lmax / lmin > cfg.max_condition) {
      H.diagonal().array() += 1e-6;
      res.regularized = true;
    }
    const Eigen::VectorXd delta = H.ldlt().solve(-g);

    if (full) {
      res.state.R = res.state.R * so3_exp(delta.segment<3>(0));
      res.state.p += delta.segment<3>(3);
      res.state.v += delta.segment<3>(6);
      res.state.bias.ba += delta.segment<3>(9);
      res.state.bias.bg += delta.segment<3>(12);
    } else {
      const double yaw = wrap_angle(pose.yaw + delta(2));
      res.state.R = so3_exp(Vec3(0.0, 0.0, yaw));
      res.state.p.x() += delta(0);
      res.state.p.y() += delta(1);
    }
    res.iterations = iter + 1;

    if (delta.norm() < cfg.update_tolerance) {
      res.converged = true;
      break;
    }
  }

  if (!res.degenerate && !res.converged && res.iterations >= cfg.max_iterations) {
    // Terminating at the iteration cap still counts as a produced estimate.
    res.converged = true;
  }
  const Vec3 yt = yaw_tilt_split(res.state.R);
  res.pose = {wrap_angle(yt[0]), res.state.p.head<2>()};
  return res;
}

}  // namespace se2lio
