#include "stratdepth/depth_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stratdepth/error.hpp"

namespace stratdepth {

DepthMap::DepthMap(std::size_t w, std::size_t h, std::vector<double> v,
                   Mask m)
    : width(w), height(h), values(std::move(v)), valid(std::move(m)) {
  validate();
}

DepthMap DepthMap::from_values(std::size_t w, std::size_t h,
                               std::vector<double> v) {
  Mask m(v.size());
  std::transform(v.begin(), v.end(), m.begin(), [](double d) {
    return static_cast<std::uint8_t>(std::isfinite(d) && d > 0.0);
  });
  return DepthMap(w, h, std::move(v), std::move(m));
}

std::size_t DepthMap::valid_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(valid.begin(), valid.end(),
                    [](std::uint8_t b) { return b != 0; }));
}

void DepthMap::validate() const {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kShapeError, "depth map is empty");
  }
  if (values.size() != size() || valid.size() != size()) {
    throw Error(ErrorCode::kShapeError,
                "depth map declares " + std::to_string(width) + "x" +
                    std::to_string(height) + " but holds " +
                    std::to_string(values.size()) + " values and " +
                    std::to_string(valid.size()) + " mask entries");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (valid[i] && !(std::isfinite(values[i]) && values[i] > 0.0)) {
      throw Error(ErrorCode::kValidationError,
                  "valid pixel " + std::to_string(i) +
                      " is not a finite positive depth");
    }
  }
}

bool same_shape(const DepthMap& a, const DepthMap& b) noexcept {
  return a.width == b.width && a.height == b.height;
}

}  // namespace stratdepth
