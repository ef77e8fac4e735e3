#pragma once

#include <Eigen/Core>

namespace stratdepth {

/// Pinhole intrinsics plus the rigid motion taking target-camera points into
/// the source camera: X_src = rotation * X_tgt + translation (mm).
struct CameraRig {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Matrix3d intrinsics() const;

  /// Throws kValidationError unless fx, fy > 0, all entries are finite and
  /// the rotation is orthonormal with determinant +1 (within 1e-9).
  void validate() const;
};

inline constexpr double kRotationTolerance = 1e-9;

bool is_rotation(const Eigen::Matrix3d& r, double tol = kRotationTolerance);

}  // namespace stratdepth
