#include "stratdepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stratdepth/error.hpp"

namespace stratdepth {

std::array<const char*, kMetricColumns> metric_names() {
  return {"abs_rel", "sq_rel", "rmse", "rmse_log",
          "delta1",  "delta2", "delta3", "n_pixels"};
}

std::array<double, kMetricColumns> metric_values(const MetricSet& m) {
  return {m.abs_rel, m.sq_rel, m.rmse,   m.rmse_log,
          m.delta1,  m.delta2, m.delta3, static_cast<double>(m.n_pixels)};
}

void EvalOptions::validate() const {
  if (!(std::isfinite(min_depth) && std::isfinite(max_depth) &&
        min_depth > 0.0 && min_depth < max_depth)) {
    throw Error(ErrorCode::kValidationError,
                "depth range must satisfy 0 < min_depth < max_depth (got " +
                    std::to_string(min_depth) + ", " +
                    std::to_string(max_depth) + ")");
  }
  for (double t : delta_thresholds) {
    if (!std::isfinite(t) || t <= 1.0) {
      throw Error(ErrorCode::kValidationError,
                  "delta thresholds must be finite and > 1");
    }
  }
}

double lower_median(std::span<double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyInput, "median of an empty list");
  }
  const auto mid = values.begin() + (values.size() - 1) / 2;
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

namespace {

void require_same_shape(const DepthMap& pred, const DepthMap& gt) {
  if (!same_shape(pred, gt) || pred.values.size() != gt.values.size() ||
      pred.valid.size() != gt.valid.size()) {
    throw Error(ErrorCode::kShapeError,
                "prediction is " + std::to_string(pred.width) + "x" +
                    std::to_string(pred.height) + ", ground truth is " +
                    std::to_string(gt.width) + "x" +
                    std::to_string(gt.height));
  }
}

std::vector<std::size_t> joint_indices(const DepthMap& pred,
                                       const DepthMap& gt) {
  std::vector<std::size_t> idx;
  idx.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (pred.is_valid(i) && gt.is_valid(i)) idx.push_back(i);
  }
  if (idx.empty()) {
    throw Error(ErrorCode::kEmptyMask,
                "no pixel is valid in both prediction and ground truth");
  }
  return idx;
}

double median_ratio(const DepthMap& pred, const DepthMap& gt,
                    const std::vector<std::size_t>& idx) {
  std::vector<double> ratios;
  ratios.reserve(idx.size());
  for (std::size_t i : idx) ratios.push_back(gt.values[i] / pred.values[i]);
  return lower_median(ratios);
}

}  // namespace

MedianScaled median_scale(const DepthMap& pred, const DepthMap& gt) {
  require_same_shape(pred, gt);
  const auto idx = joint_indices(pred, gt);
  const double ratio = median_ratio(pred, gt, idx);
  DepthMap scaled = pred;
  for (double& v : scaled.values) v *= ratio;
  return {std::move(scaled), ratio};
}

MetricSet compute_metrics(const DepthMap& pred, const DepthMap& gt,
                          const EvalOptions& opts) {
  opts.validate();
  require_same_shape(pred, gt);
  const auto idx = joint_indices(pred, gt);

  const double ratio =
      opts.scaling == Scaling::kMedian ? median_ratio(pred, gt, idx) : 1.0;

  double abs_rel = 0.0, sq_rel = 0.0, sq = 0.0, sq_log = 0.0;
  std::array<std::size_t, 3> within{};
  for (std::size_t i : idx) {
    const double p =
        std::clamp(pred.values[i] * ratio, opts.min_depth, opts.max_depth);
    const double g = std::clamp(gt.values[i], opts.min_depth, opts.max_depth);
    const double diff = p - g;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    sq += diff * diff;
    const double dlog = std::log(p) - std::log(g);
    sq_log += dlog * dlog;
    const double worst = std::max(p / g, g / p);
    for (std::size_t k = 0; k < 3; ++k) {
      if (worst < opts.delta_thresholds[k]) ++within[k];
    }
  }

  const auto n = static_cast<double>(idx.size());
  MetricSet m;
  m.abs_rel = abs_rel / n;
  m.sq_rel = sq_rel / n;
  m.rmse = std::sqrt(sq / n);
  m.rmse_log = std::sqrt(sq_log / n);
  m.delta1 = static_cast<double>(within[0]) / n;
  m.delta2 = static_cast<double>(within[1]) / n;
  m.delta3 = static_cast<double>(within[2]) / n;
  m.n_pixels = idx.size();
  return m;
}

MetricSet aggregate(std::span<const MetricSet> per_frame, AggregateMode) {
  if (per_frame.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot aggregate zero frames");
  }
  MetricSet out;
  for (const auto& f : per_frame) {
    out.abs_rel += f.abs_rel;
    out.sq_rel += f.sq_rel;
    out.rmse += f.rmse;
    out.rmse_log += f.rmse_log;
    out.delta1 += f.delta1;
    out.delta2 += f.delta2;
    out.delta3 += f.delta3;
    out.n_pixels += f.n_pixels;
  }
  const auto n = static_cast<double>(per_frame.size());
  out.abs_rel /= n;
  out.sq_rel /= n;
  out.rmse /= n;
  out.rmse_log /= n;
  out.delta1 /= n;
  out.delta2 /= n;
  out.delta3 /= n;
  return out;
}

}  // namespace stratdepth
