#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace stratdepth {

/// Row-major boolean grid. Stored as bytes so spans and concurrent reads
/// stay simple (std::vector<bool> is neither).
using Mask = std::vector<std::uint8_t>;

/**
 * Dense depth map in millimetres with a per-pixel validity mask.
 *
 * Invariants (checked by validate()): both grids hold width*height entries,
 * the map is nonempty, and every valid value is finite and strictly
 * positive. Values under invalid pixels are unconstrained.
 */
struct DepthMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
  Mask valid;

  DepthMap() = default;
  DepthMap(std::size_t w, std::size_t h, std::vector<double> v, Mask m);

  /// Builds a map whose mask is derived from the values: finite and > 0.
  static DepthMap from_values(std::size_t w, std::size_t h,
                              std::vector<double> v);

  std::size_t size() const noexcept { return width * height; }
  std::size_t index(std::size_t x, std::size_t y) const noexcept {
    return y * width + x;
  }
  bool is_valid(std::size_t i) const noexcept { return valid[i] != 0; }
  std::size_t valid_count() const noexcept;

  /// Throws Error(kShapeError) or Error(kValidationError).
  void validate() const;
};

bool same_shape(const DepthMap& a, const DepthMap& b) noexcept;

}  // namespace stratdepth
