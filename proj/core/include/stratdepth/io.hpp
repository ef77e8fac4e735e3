#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stratdepth/camera.hpp"
#include "stratdepth/depth_map.hpp"
#include "stratdepth/image.hpp"
#include "stratdepth/metrics.hpp"
#include "stratdepth/pose.hpp"
#include "stratdepth/stratify.hpp"

namespace stratdepth {

// PFM -----------------------------------------------------------------------

/// Single-channel float grid, rows top to bottom.
struct FloatGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> values;
  std::size_t nonfinite_count = 0;  // NaN or inf samples seen while parsing
};

/// Grayscale Portable Float Map ("Pf"). Colour maps ("PF") are rejected.
/// Throws kFormatError, kTruncatedError or kIoError.
FloatGrid parse_pfm(std::span<const std::uint8_t> bytes);
FloatGrid read_pfm(const std::filesystem::path& path);

/// Little-endian (scale -1.0), rows stored bottom to top.
std::vector<std::uint8_t> pfm_bytes(const FloatGrid& grid);
void write_pfm(const std::filesystem::path& path, const FloatGrid& grid);

/// Non-positive and non-finite samples become invalid pixels.
DepthMap depth_from_grid(const FloatGrid& grid);
FloatGrid grid_from_depth(const DepthMap& depth);
Image image_from_grid(const FloatGrid& grid);
FloatGrid grid_from_image(const Image& image);

// PGM -----------------------------------------------------------------------

struct U16Grid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> values;
};

/// Binary "P5" with maxval 65535 and big-endian samples.
U16Grid parse_pgm16_raw(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> pgm16_bytes(const U16Grid& grid);
void write_pgm16(const std::filesystem::path& path, const U16Grid& grid);

/// depth_mm = raw / scale_divisor; raw 0 marks an invalid pixel.
DepthMap parse_pgm16(std::span<const std::uint8_t> bytes, double scale_divisor);
DepthMap read_pgm16(const std::filesystem::path& path, double scale_divisor);

/// 8-bit "P5" mask, 255 where valid.
void write_mask_pgm(const std::filesystem::path& path, const Mask& mask,
                    std::size_t width, std::size_t height);

/// Dispatches on the file magic: "Pf" as PFM, "P5" as 16-bit PGM.
DepthMap read_depth(const std::filesystem::path& path, double scale_divisor);

// Manifest ------------------------------------------------------------------

struct ManifestEntry {
  std::string frame_id;
  std::string pred_path;
  std::string gt_path;
  std::optional<std::string> image_path;
  std::optional<double> baseline_abs_rel;
};

struct FrameManifest {
  std::vector<ManifestEntry> entries;
  /// Relative paths resolve against this directory.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& p) const;
};

/// JSON array of entry objects; unknown fields are ignored, order kept.
/// Throws kManifestError for duplicate ids or missing/ill-typed fields.
FrameManifest parse_manifest(std::string_view text);
FrameManifest read_manifest(const std::filesystem::path& path);

// Report --------------------------------------------------------------------

using ConfigValue = std::variant<bool, std::int64_t, double, std::string>;

struct FrameRecord {
  std::string frame_id;
  MetricSet metrics;
  std::optional<double> feature;
  std::optional<std::size_t> component;
  std::optional<std::string> difficulty;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct SkippedFrame {
  std::string frame_id;
  std::string reason;

  friend bool operator==(const SkippedFrame&, const SkippedFrame&) = default;
};

struct ClusterRecord {
  std::string name;
  std::optional<std::size_t> component;
  std::size_t count = 0;
  std::optional<MetricSet> metrics;  // omitted when count == 0

  friend bool operator==(const ClusterRecord&, const ClusterRecord&) = default;
};

struct Report {
  std::string tool = "stratdepth";
  std::string version;
  std::string command;
  std::map<std::string, ConfigValue> config;
  std::vector<FrameRecord> frames;
  std::vector<SkippedFrame> skipped;
  std::optional<MetricSet> global;
  std::vector<ClusterRecord> clusters;
  std::optional<GmmModel> gmm;
};

std::string library_version();

std::string report_to_json(const Report& report);
Report report_from_json(std::string_view text);
void write_report(const std::filesystem::path& path, const Report& report);
Report read_report(const std::filesystem::path& path);

/// One row per (cluster, metric): "cluster,metric,value". Reports without
/// clusters flatten their global aggregate under the name "global".
std::string report_to_csv(const Report& report);
void write_report_csv(const std::filesystem::path& path, const Report& report);

// Camera rig ----------------------------------------------------------------

/// {"fx", "fy", "cx", "cy", "rotation": 3x3 row-major nested array,
///  "translation": [tx, ty, tz]}. The rig is validated after parsing.
CameraRig parse_rig(std::string_view text);
CameraRig read_rig(const std::filesystem::path& path);

// Trajectories --------------------------------------------------------------

/// "timestamp tx ty tz qx qy qz qw" per line; '#' comments and blank lines
/// are skipped. Quaternions are normalized; a zero quaternion is an error.
Trajectory parse_trajectory(std::string_view text);
Trajectory read_trajectory(const std::filesystem::path& path);
std::string trajectory_to_text(const Trajectory& traj);
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace stratdepth
