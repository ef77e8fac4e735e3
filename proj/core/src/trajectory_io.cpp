#include <charconv>
#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "bytes.hpp"
#include "stratdepth/error.hpp"
#include "stratdepth/io.hpp"

namespace stratdepth {

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace

Trajectory parse_trajectory(std::string_view text) {
  Trajectory t;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    double v[8];
    std::size_t n = 0;
    std::size_t pos = 0;
    auto skip = [&] {
      while (pos < line.size() &&
             (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) {
        ++pos;
      }
    };
    skip();
    if (pos == line.size() || line[pos] == '#') continue;
    while (pos < line.size()) {
      if (n == 8) {
        throw Error(ErrorCode::kFormatError,
                    "trajectory line " + std::to_string(line_no) +
                        ": more than 8 fields");
      }
      const auto [p, ec] =
          std::from_chars(line.data() + pos, line.data() + line.size(), v[n]);
      if (ec != std::errc() || !std::isfinite(v[n])) {
        throw Error(ErrorCode::kFormatError,
                    "trajectory line " + std::to_string(line_no) +
                        ": field " + std::to_string(n + 1) + " is not a number");
      }
      pos = static_cast<std::size_t>(p - line.data());
      if (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' &&
          line[pos] != '\r') {
        throw Error(ErrorCode::kFormatError,
                    "trajectory line " + std::to_string(line_no) +
                        ": malformed number");
      }
      ++n;
      skip();
    }
    if (n != 8) {
      throw Error(ErrorCode::kFormatError,
                  "trajectory line " + std::to_string(line_no) + ": expected 8 "
                  "fields 'timestamp tx ty tz qx qy qz qw', got " +
                      std::to_string(n));
    }
    Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (q.norm() < 1e-12) {
      throw Error(ErrorCode::kFormatError,
                  "trajectory line " + std::to_string(line_no) +
                      ": zero quaternion");
    }
    q.normalize();
    t.timestamps.push_back(v[0]);
    t.poses.push_back({q.toRotationMatrix(), Eigen::Vector3d(v[1], v[2], v[3])});
  }
  t.validate();
  return t;
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return parse_trajectory(std::string_view(
        reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::string trajectory_to_text(const Trajectory& traj) {
  std::string out = "# timestamp tx ty tz qx qy qz qw\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Eigen::Quaterniond q(traj.poses[i].rotation);
    const auto& t = traj.poses[i].translation;
    for (double v : {traj.timestamps[i], t.x(), t.y(), t.z(), q.x(), q.y(),
                     q.z(), q.w()}) {
      out += shortest(v);
      out += ' ';
    }
    out.back() = '\n';
  }
  return out;
}

void write_trajectory(const std::filesystem::path& path,
                      const Trajectory& traj) {
  const std::string text = trajectory_to_text(traj);
  detail::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(
                                         text.data()),
                                     text.size()));
}

}  // namespace stratdepth
