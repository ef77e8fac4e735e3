#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "stratdepth/depth_map.hpp"

namespace stratdepth {

/// The standard monocular-depth error metrics for one frame or aggregate.
struct MetricSet {
  double abs_rel = 0.0;
  double sq_rel = 0.0;   // mm
  double rmse = 0.0;     // mm
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t n_pixels = 0;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

/// Number of scalar metric columns in a MetricSet, n_pixels included.
inline constexpr std::size_t kMetricColumns = 8;
std::array<const char*, kMetricColumns> metric_names();
std::array<double, kMetricColumns> metric_values(const MetricSet& m);

enum class Scaling { kNone, kMedian };

struct EvalOptions {
  double min_depth = 1e-3;  // mm
  double max_depth = 150.0; // mm
  Scaling scaling = Scaling::kNone;
  std::array<double, 3> delta_thresholds{1.25, 1.25 * 1.25,
                                         1.25 * 1.25 * 1.25};

  /// Throws Error(kValidationError) unless 0 < min_depth < max_depth and the
  /// thresholds are finite and > 1.
  void validate() const;
};

struct MedianScaled {
  DepthMap scaled;
  double ratio = 1.0;
};

/// Lower-middle median (no interpolation). `values` is reordered.
double lower_median(std::span<double> values);

/// Scales `pred` by median(gt/pred) over jointly valid pixels.
/// Throws kEmptyMask when no pixel is valid in both maps, kShapeError on
/// shape mismatch.
MedianScaled median_scale(const DepthMap& pred, const DepthMap& gt);

/// Optional median scaling, then clamping of both maps into
/// [min_depth, max_depth], then the per-pixel metrics over the joint mask.
/// The delta ratios use a strict `<` against each threshold.
MetricSet compute_metrics(const DepthMap& pred, const DepthMap& gt,
                          const EvalOptions& opts = {});

enum class AggregateMode { kFrameMean };

/// Unweighted per-frame mean of each metric; n_pixels is summed.
/// Throws kEmptyInput on an empty list.
MetricSet aggregate(std::span<const MetricSet> per_frame,
                    AggregateMode mode = AggregateMode::kFrameMean);

}  // namespace stratdepth
