#include <set>
#include <string>

#include <json.hpp>

#include "bytes.hpp"
#include "stratdepth/error.hpp"
#include "stratdepth/io.hpp"

namespace stratdepth {

using nlohmann::json;

namespace {

std::string required_string(const json& entry, std::size_t index,
                            const char* field) {
  const auto it = entry.find(field);
  if (it == entry.end()) {
    throw Error(ErrorCode::kManifestError,
                "entry " + std::to_string(index) + " is missing required field '" +
                    field + "'");
  }
  if (!it->is_string() || it->get_ref<const std::string&>().empty()) {
    throw Error(ErrorCode::kManifestError,
                "entry " + std::to_string(index) + ": field '" + field +
                    "' must be a nonempty string");
  }
  return it->get<std::string>();
}

}  // namespace

std::filesystem::path FrameManifest::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
}

FrameManifest parse_manifest(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kManifestError, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::kManifestError, "manifest must be a JSON array");
  }
  FrameManifest m;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& e = doc[i];
    if (!e.is_object()) {
      throw Error(ErrorCode::kManifestError,
                  "entry " + std::to_string(i) + " is not an object");
    }
    ManifestEntry entry;
    entry.frame_id = required_string(e, i, "frame_id");
    entry.pred_path = required_string(e, i, "pred_path");
    entry.gt_path = required_string(e, i, "gt_path");
    if (e.contains("image_path") && !e["image_path"].is_null()) {
      entry.image_path = required_string(e, i, "image_path");
    }
    if (e.contains("baseline_abs_rel") && !e["baseline_abs_rel"].is_null()) {
      const json& v = e["baseline_abs_rel"];
      if (!v.is_number()) {
        throw Error(ErrorCode::kManifestError,
                    "entry " + std::to_string(i) +
                        ": field 'baseline_abs_rel' must be a number");
      }
      entry.baseline_abs_rel = v.get<double>();
    }
    if (!seen.insert(entry.frame_id).second) {
      throw Error(ErrorCode::kManifestError,
                  "duplicate frame_id '" + entry.frame_id + "'");
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

FrameManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  FrameManifest m;
  try {
    m = parse_manifest(std::string_view(
        reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
  m.base_dir = path.parent_path();
  return m;
}

}  // namespace stratdepth
