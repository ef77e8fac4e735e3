#include "stratdepth/pose.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "stratdepth/camera.hpp"
#include "stratdepth/error.hpp"

namespace stratdepth {

Se3 compose(const Se3& p, const Se3& q) {
  return {p.rotation * q.rotation, p.rotation * q.translation + p.translation};
}

Se3 inverse(const Se3& p) {
  const Eigen::Matrix3d rt = p.rotation.transpose();
  return {rt, -(rt * p.translation)};
}

void Trajectory::validate() const {
  if (timestamps.size() != poses.size()) {
    throw Error(ErrorCode::kValidationError,
                "trajectory has " + std::to_string(timestamps.size()) +
                    " timestamps for " + std::to_string(poses.size()) +
                    " poses");
  }
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (!std::isfinite(timestamps[i]) ||
        (i > 0 && !(timestamps[i] > timestamps[i - 1]))) {
      throw Error(ErrorCode::kValidationError,
                  "timestamps must be finite and strictly increasing (pose " +
                      std::to_string(i) + ")");
    }
    if (!is_rotation(poses[i].rotation) || !poses[i].translation.allFinite()) {
      throw Error(ErrorCode::kValidationError,
                  "pose " + std::to_string(i) + " is not a proper rigid motion");
    }
  }
}

namespace {

Eigen::Matrix3Xd to_matrix(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::Matrix3Xd m(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = pts[i];
  }
  return m;
}

bool collinear(const Eigen::Matrix3Xd& centered) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(centered * centered.transpose());
  const auto sv = svd.singularValues();
  return sv(0) <= 0.0 || sv(1) <= 1e-12 * sv(0);
}

}  // namespace

Sim3 align_points(const std::vector<Eigen::Vector3d>& source,
                  const std::vector<Eigen::Vector3d>& target, Alignment mode) {
  if (source.size() != target.size()) {
    throw Error(ErrorCode::kAlignmentError, "point sets differ in length");
  }
  if (mode == Alignment::kNone) return {};
  if (source.size() < 3) {
    throw Error(ErrorCode::kDegenerateTrajectory,
                "alignment needs at least 3 poses, got " +
                    std::to_string(source.size()));
  }
  const Eigen::Matrix3Xd src = to_matrix(source);
  const Eigen::Matrix3Xd dst = to_matrix(target);
  const Eigen::Vector3d mu_src = src.rowwise().mean();
  const Eigen::Vector3d mu_dst = dst.rowwise().mean();
  const Eigen::Matrix3Xd sc = src.colwise() - mu_src;
  const Eigen::Matrix3Xd dc = dst.colwise() - mu_dst;
  if (collinear(sc) || collinear(dc)) {
    throw Error(ErrorCode::kDegenerateTrajectory,
                "positions are collinear; rotation is not determined");
  }

  const double n = static_cast<double>(source.size());
  const Eigen::Matrix3d cov = dc * sc.transpose() / n;
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    d(2) = -1.0;
  }

  Sim3 s;
  s.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  if (mode == Alignment::kSim3) {
    const double var_src = sc.squaredNorm() / n;
    s.scale = svd.singularValues().dot(d) / var_src;
  }
  s.translation = mu_dst - s.scale * s.rotation * mu_src;
  return s;
}

Trajectory transform(const Trajectory& traj, const Sim3& s) {
  Trajectory out;
  out.timestamps = traj.timestamps;
  out.poses.reserve(traj.size());
  for (const auto& p : traj.poses) {
    out.poses.push_back({s.rotation * p.rotation,
                         s.scale * (s.rotation * p.translation) + s.translation});
  }
  return out;
}

AteResult ate(const Trajectory& gt, const Trajectory& est, Alignment mode) {
  if (gt.size() != est.size()) {
    throw Error(ErrorCode::kAlignmentError,
                "trajectories differ in length (" + std::to_string(gt.size()) +
                    " vs " + std::to_string(est.size()) + ")");
  }
  if (gt.size() == 0) {
    throw Error(ErrorCode::kAlignmentError, "trajectories are empty");
  }
  if (gt.timestamps != est.timestamps) {
    throw Error(ErrorCode::kAlignmentError, "timestamps do not match");
  }
  gt.validate();
  est.validate();

  std::vector<Eigen::Vector3d> src, dst;
  src.reserve(est.size());
  dst.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    src.push_back(est.poses[i].translation);
    dst.push_back(gt.poses[i].translation);
  }

  AteResult r;
  r.alignment = align_points(src, dst, mode);
  r.aligned = transform(est, r.alignment);
  double sq = 0.0;
  r.per_frame.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double e =
        (r.aligned.poses[i].translation - gt.poses[i].translation).norm();
    r.per_frame.push_back(e);
    sq += e * e;
  }
  r.rmse = std::sqrt(sq / static_cast<double>(gt.size()));
  return r;
}

}  // namespace stratdepth
