#include <cctype>
#include <cmath>
#include <string>

#include "bytes.hpp"
#include "netpbm_header.hpp"
#include "stratdepth/error.hpp"
#include "stratdepth/io.hpp"

namespace stratdepth {

U16Grid parse_pgm16_raw(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 3) {
    throw Error(ErrorCode::kTruncatedError, "PGM: file too short for a header");
  }
  if (bytes[0] != 'P' || bytes[1] != '5') {
    const bool ascii = bytes[0] == 'P' && bytes[1] == '2';
    throw Error(ErrorCode::kFormatError,
                ascii ? "PGM: ASCII 'P2' is not supported, expected binary 'P5'"
                      : "PGM: bad magic, expected 'P5'");
  }
  if (!std::isspace(bytes[2]) && bytes[2] != '#') {
    throw Error(ErrorCode::kFormatError, "PGM: magic not followed by whitespace");
  }
  detail::HeaderReader header(bytes, "PGM", true);
  const auto width = header.dimension("width");
  const auto height = header.dimension("height");
  const auto maxval = header.dimension("maxval");
  if (maxval != 65535) {
    throw Error(ErrorCode::kFormatError,
                "PGM: maxval must be 65535 for 16-bit depth, got " +
                    std::to_string(maxval));
  }
  const std::size_t start = header.end_of_header();
  const std::uint64_t available = bytes.size() - start;
  if (available / 2 / width < height) {
    throw Error(ErrorCode::kTruncatedError,
                "PGM: header declares " + std::to_string(width) + "x" +
                    std::to_string(height) + " but only " +
                    std::to_string(available) + " payload bytes follow");
  }
  const std::uint64_t count = width * height;
  if (available != count * 2) {
    throw Error(ErrorCode::kFormatError, "PGM: trailing bytes after payload");
  }
  U16Grid g{width, height, std::vector<std::uint16_t>(count)};
  const std::uint8_t* p = bytes.data() + start;
  for (std::size_t i = 0; i < count; ++i, p += 2) {
    g.values[i] = detail::load<std::uint16_t>(p, std::endian::big);
  }
  return g;
}

std::vector<std::uint8_t> pgm16_bytes(const U16Grid& grid) {
  if (grid.width == 0 || grid.height == 0 ||
      grid.values.size() != grid.width * grid.height) {
    throw Error(ErrorCode::kShapeError, "PGM: grid shape is inconsistent");
  }
  const std::string header = "P5\n" + std::to_string(grid.width) + " " +
                             std::to_string(grid.height) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + grid.values.size() * 2);
  for (auto v : grid.values) detail::store(out, v, std::endian::big);
  return out;
}

void write_pgm16(const std::filesystem::path& path, const U16Grid& grid) {
  detail::write_file(path, pgm16_bytes(grid));
}

DepthMap parse_pgm16(std::span<const std::uint8_t> bytes,
                     double scale_divisor) {
  if (!(scale_divisor > 0.0) || !std::isfinite(scale_divisor)) {
    throw Error(ErrorCode::kValidationError, "depth scale divisor must be > 0");
  }
  const U16Grid raw = parse_pgm16_raw(bytes);
  DepthMap d;
  d.width = raw.width;
  d.height = raw.height;
  d.values.resize(raw.values.size());
  d.valid.resize(raw.values.size());
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    d.values[i] = static_cast<double>(raw.values[i]) / scale_divisor;
    d.valid[i] = raw.values[i] != 0;
  }
  return d;
}

DepthMap read_pgm16(const std::filesystem::path& path, double scale_divisor) {
  try {
    return parse_pgm16(detail::read_file(path), scale_divisor);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_mask_pgm(const std::filesystem::path& path, const Mask& mask,
                    std::size_t width, std::size_t height) {
  if (mask.size() != width * height || mask.empty()) {
    throw Error(ErrorCode::kShapeError, "mask shape is inconsistent");
  }
  const std::string header = "P5\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (auto m : mask) out.push_back(m ? 255 : 0);
  detail::write_file(path, out);
}

DepthMap read_depth(const std::filesystem::path& path, double scale_divisor) {
  const auto bytes = detail::read_file(path);
  try {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
      return parse_pgm16(bytes, scale_divisor);
    }
    return depth_from_grid(parse_pfm(bytes));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace stratdepth
