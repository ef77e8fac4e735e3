#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "stratdepth/error.hpp"
#include "stratdepth/losses.hpp"

namespace stratdepth {

Eigen::Matrix3d CameraRig::intrinsics() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  if (!r.allFinite()) return false;
  const Eigen::Matrix3d gram = r.transpose() * r;
  return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

void CameraRig::validate() const {
  if (!(std::isfinite(fx) && std::isfinite(fy) && fx > 0.0 && fy > 0.0)) {
    throw Error(ErrorCode::kValidationError, "focal lengths must be > 0");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy) || !translation.allFinite()) {
    throw Error(ErrorCode::kValidationError,
                "principal point and translation must be finite");
  }
  if (!is_rotation(rotation)) {
    throw Error(ErrorCode::kValidationError,
                "rotation is not orthonormal with determinant +1");
  }
}

namespace {

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kPixelSnap ? r : v;
}

// Bilinear sample; false when a tap with nonzero weight is out of bounds.
bool sample(const Image& src, double u, double v, double* out) {
  const double fx0 = std::floor(u);
  const double fy0 = std::floor(v);
  const double ax = u - fx0;
  const double ay = v - fy0;
  const double w = static_cast<double>(src.width);
  const double h = static_cast<double>(src.height);
  if (fx0 < 0.0 || fy0 < 0.0 || fx0 > w - 1.0 || fy0 > h - 1.0) return false;
  if ((ax > 0.0 && fx0 + 1.0 > w - 1.0) || (ay > 0.0 && fy0 + 1.0 > h - 1.0)) {
    return false;
  }
  const auto x0 = static_cast<std::size_t>(fx0);
  const auto y0 = static_cast<std::size_t>(fy0);
  const std::size_t x1 = ax > 0.0 ? x0 + 1 : x0;
  const std::size_t y1 = ay > 0.0 ? y0 + 1 : y0;
  for (std::size_t c = 0; c < src.channels; ++c) {
    const double top = (1.0 - ax) * src.at(x0, y0, c) + ax * src.at(x1, y0, c);
    const double bot = (1.0 - ax) * src.at(x0, y1, c) + ax * src.at(x1, y1, c);
    out[c] = (1.0 - ay) * top + ay * bot;
  }
  return true;
}

}  // namespace

WarpResult warp(const Image& source, const DepthMap& target_depth,
                const CameraRig& rig) {
  rig.validate();
  if (source.values.size() != source.pixels() * source.channels ||
      target_depth.values.size() != target_depth.size() ||
      target_depth.valid.size() != target_depth.size()) {
    throw Error(ErrorCode::kShapeError, "warp inputs are malformed");
  }
  WarpResult out{Image(target_depth.width, target_depth.height,
                       source.channels),
                 Mask(target_depth.size(), 0)};
  std::vector<double> px(source.channels);
  for (std::size_t v = 0; v < target_depth.height; ++v) {
    for (std::size_t u = 0; u < target_depth.width; ++u) {
      const std::size_t i = target_depth.index(u, v);
      if (!target_depth.is_valid(i)) continue;
      const double d = target_depth.values[i];
      const Eigen::Vector3d ray((static_cast<double>(u) - rig.cx) / rig.fx,
                                (static_cast<double>(v) - rig.cy) / rig.fy,
                                1.0);
      const Eigen::Vector3d moved = rig.rotation * (d * ray) + rig.translation;
      if (!(moved.z() > 0.0)) continue;
      const double us = snap(rig.fx * moved.x() / moved.z() + rig.cx);
      const double vs = snap(rig.fy * moved.y() / moved.z() + rig.cy);
      if (!std::isfinite(us) || !std::isfinite(vs)) continue;
      if (!sample(source, us, vs, px.data())) continue;
      for (std::size_t c = 0; c < source.channels; ++c) {
        out.warped.at(u, v, c) = px[c];
      }
      out.valid[i] = 1;
    }
  }
  return out;
}

}  // namespace stratdepth
