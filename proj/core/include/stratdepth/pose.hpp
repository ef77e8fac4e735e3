#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/StdVector>

namespace stratdepth {

/// Rigid transform x -> rotation * x + translation (mm).
struct Se3 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Se3 identity() { return {}; }
  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }
};

/// (p o q)(x) = p(q(x)).
Se3 compose(const Se3& p, const Se3& q);
Se3 inverse(const Se3& p);

struct Trajectory {
  std::vector<double> timestamps;
  std::vector<Se3> poses;

  std::size_t size() const noexcept { return poses.size(); }
  /// Throws kValidationError for non-increasing timestamps, mismatched
  /// lengths, or a pose whose rotation is not a proper rotation.
  void validate() const;
};

enum class Alignment { kNone, kSe3, kSim3 };

/// Similarity x -> scale * rotation * x + translation.
struct Sim3 {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/**
 * Least-squares alignment of `source` points onto `target` (closed-form
 * Procrustes with determinant correction; scale only for kSim3).
 * Throws kDegenerateTrajectory for fewer than three points or collinear
 * point sets.
 */
Sim3 align_points(const std::vector<Eigen::Vector3d>& source,
                  const std::vector<Eigen::Vector3d>& target, Alignment mode);

struct AteResult {
  double rmse = 0.0;
  std::vector<double> per_frame;  // position error per pose, mm
  Sim3 alignment;
  Trajectory aligned;             // estimate after alignment
};

/// Absolute trajectory error. Timestamps must match exactly
/// (kAlignmentError otherwise).
AteResult ate(const Trajectory& gt, const Trajectory& est, Alignment mode);

Trajectory transform(const Trajectory& traj, const Sim3& s);

}  // namespace stratdepth
