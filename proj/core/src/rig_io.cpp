#include <string>

#include <json.hpp>

#include "bytes.hpp"
#include "stratdepth/error.hpp"
#include "stratdepth/io.hpp"

namespace stratdepth {

using nlohmann::json;

CameraRig parse_rig(std::string_view text) {
  CameraRig rig;
  try {
    const json j = json::parse(text.begin(), text.end());
    rig.fx = j.at("fx").get<double>();
    rig.fy = j.at("fy").get<double>();
    rig.cx = j.at("cx").get<double>();
    rig.cy = j.at("cy").get<double>();
    const auto& r = j.at("rotation");
    if (!r.is_array() || r.size() != 3) {
      throw Error(ErrorCode::kFormatError, "rig: rotation must be 3x3");
    }
    for (int i = 0; i < 3; ++i) {
      if (!r[i].is_array() || r[i].size() != 3) {
        throw Error(ErrorCode::kFormatError, "rig: rotation must be 3x3");
      }
      for (int k = 0; k < 3; ++k) rig.rotation(i, k) = r[i][k].get<double>();
    }
    const auto& t = j.at("translation");
    if (!t.is_array() || t.size() != 3) {
      throw Error(ErrorCode::kFormatError, "rig: translation must have 3 entries");
    }
    for (int i = 0; i < 3; ++i) rig.translation(i) = t[i].get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("rig: ") + e.what());
  }
  rig.validate();
  return rig;
}

CameraRig read_rig(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return parse_rig(std::string_view(
        reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace stratdepth
