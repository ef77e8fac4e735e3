#pragma once

#include <cstddef>
#include <vector>

namespace stratdepth {

/// Row-major image with interleaved channels; intensities nominally in [0,1].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<double> values;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c, double fill = 0.0)
      : width(w), height(h), channels(c), values(w * h * c, fill) {}
  Image(std::size_t w, std::size_t h, std::size_t c, std::vector<double> v);

  std::size_t pixels() const noexcept { return width * height; }

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return values[(y * width + x) * channels + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return values[(y * width + x) * channels + c];
  }

  /// Throws kShapeError on an inconsistent shape, kValidationError on a
  /// non-finite value or a channel count other than 1 or 3.
  void validate() const;
};

bool same_shape(const Image& a, const Image& b) noexcept;

}  // namespace stratdepth
