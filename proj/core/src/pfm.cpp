#include <cmath>
#include <cstdio>
#include <string>

#include "bytes.hpp"
#include "netpbm_header.hpp"
#include "stratdepth/error.hpp"
#include "stratdepth/io.hpp"

namespace stratdepth {

FloatGrid parse_pfm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 3) {
    throw Error(ErrorCode::kTruncatedError, "PFM: file too short for a header");
  }
  if (bytes[0] == 'P' && bytes[1] == 'F') {
    throw Error(ErrorCode::kFormatError,
                "PFM: colour variant 'PF' is not supported, depth maps must "
                "be grayscale 'Pf'");
  }
  if (bytes[0] != 'P' || bytes[1] != 'f') {
    throw Error(ErrorCode::kFormatError, "PFM: bad magic, expected 'Pf'");
  }
  if (!std::isspace(bytes[2])) {
    throw Error(ErrorCode::kFormatError, "PFM: magic not followed by whitespace");
  }
  detail::HeaderReader header(bytes, "PFM", false);
  const auto width = header.dimension("width");
  const auto height = header.dimension("height");
  const double scale = header.real("scale");
  if (!std::isfinite(scale) || scale == 0.0) {
    throw Error(ErrorCode::kFormatError, "PFM: scale must be finite and nonzero");
  }
  const auto order = scale < 0.0 ? std::endian::little : std::endian::big;
  const std::size_t start = header.end_of_header();

  const std::uint64_t available = bytes.size() - start;
  if (available / 4 / width < height) {
    throw Error(ErrorCode::kTruncatedError,
                "PFM: header declares " + std::to_string(width) + "x" +
                    std::to_string(height) + " but only " +
                    std::to_string(available) + " payload bytes follow");
  }
  const std::uint64_t count = width * height;
  if (available != count * 4) {
    throw Error(ErrorCode::kFormatError, "PFM: trailing bytes after payload");
  }

  FloatGrid grid;
  grid.width = width;
  grid.height = height;
  grid.values.resize(count);
  const std::uint8_t* p = bytes.data() + start;
  for (std::size_t row = 0; row < height; ++row) {
    // Stored bottom row first.
    float* dst = grid.values.data() + (height - 1 - row) * width;
    for (std::size_t x = 0; x < width; ++x, p += 4) {
      dst[x] = detail::load<float>(p, order);
      if (!std::isfinite(dst[x])) ++grid.nonfinite_count;
    }
  }
  return grid;
}

FloatGrid read_pfm(const std::filesystem::path& path) {
  try {
    return parse_pfm(detail::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<std::uint8_t> pfm_bytes(const FloatGrid& grid) {
  if (grid.width == 0 || grid.height == 0 ||
      grid.values.size() != grid.width * grid.height) {
    throw Error(ErrorCode::kShapeError, "PFM: grid shape is inconsistent");
  }
  const std::string header = "Pf\n" + std::to_string(grid.width) + " " +
                             std::to_string(grid.height) + "\n-1.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + grid.values.size() * 4);
  for (std::size_t row = grid.height; row-- > 0;) {
    for (std::size_t x = 0; x < grid.width; ++x) {
      detail::store<float>(out, grid.values[row * grid.width + x],
                           std::endian::little);
    }
  }
  return out;
}

void write_pfm(const std::filesystem::path& path, const FloatGrid& grid) {
  detail::write_file(path, pfm_bytes(grid));
}

DepthMap depth_from_grid(const FloatGrid& grid) {
  std::vector<double> v(grid.values.begin(), grid.values.end());
  return DepthMap::from_values(grid.width, grid.height, std::move(v));
}

FloatGrid grid_from_depth(const DepthMap& depth) {
  FloatGrid g{depth.width, depth.height, {}, 0};
  g.values.resize(depth.size());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    g.values[i] = depth.is_valid(i) ? static_cast<float>(depth.values[i]) : 0.0f;
  }
  return g;
}

Image image_from_grid(const FloatGrid& grid) {
  if (grid.nonfinite_count != 0) {
    throw Error(ErrorCode::kValidationError,
                "image holds " + std::to_string(grid.nonfinite_count) +
                    " non-finite samples");
  }
  return Image(grid.width, grid.height, 1,
               std::vector<double>(grid.values.begin(), grid.values.end()));
}

FloatGrid grid_from_image(const Image& image) {
  if (image.channels != 1) {
    throw Error(ErrorCode::kShapeError, "PFM output is single-channel only");
  }
  FloatGrid g{image.width, image.height, {}, 0};
  g.values.assign(image.values.begin(), image.values.end());
  return g;
}

}  // namespace stratdepth
