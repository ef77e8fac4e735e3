#include "stratdepth/image.hpp"

#include <cmath>
#include <string>

#include "stratdepth/error.hpp"

namespace stratdepth {

Image::Image(std::size_t w, std::size_t h, std::size_t c, std::vector<double> v)
    : width(w), height(h), channels(c), values(std::move(v)) {
  validate();
}

void Image::validate() const {
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::kValidationError,
                "images have 1 or 3 channels, got " + std::to_string(channels));
  }
  if (width == 0 || height == 0 || values.size() != width * height * channels) {
    throw Error(ErrorCode::kShapeError,
                "image declares " + std::to_string(width) + "x" +
                    std::to_string(height) + "x" + std::to_string(channels) +
                    " but holds " + std::to_string(values.size()) + " values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kValidationError, "image holds a non-finite value");
    }
  }
}

bool same_shape(const Image& a, const Image& b) noexcept {
  return a.width == b.width && a.height == b.height &&
         a.channels == b.channels;
}

}  // namespace stratdepth
