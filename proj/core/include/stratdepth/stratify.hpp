#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stratdepth/depth_map.hpp"
#include "stratdepth/metrics.hpp"

namespace stratdepth {

/// Which per-frame quantity was clustered. It decides which end of the
/// feature axis counts as hard.
enum class FeatureKind { kValidRatio, kBaselineError };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view name);

enum class Difficulty { kHard, kMedium, kEasy };

std::string_view to_string(Difficulty d);

inline constexpr double kVarianceFloor = 1e-8;

/// One-dimensional Gaussian mixture.
struct GmmModel {
  std::size_t k = 0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
  FeatureKind feature_kind = FeatureKind::kValidRatio;

  /// Log-likelihood trace of the fit: entry 0 is the initialization, each
  /// later entry follows one EM step. Mean per-sample values.
  std::vector<double> log_likelihood_trace;
  std::size_t iterations = 0;
  bool converged = false;
};

struct GmmOptions {
  std::size_t k = 3;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::size_t max_iter = 500;
  /// Gaussian jitter on the initial means, in units of the sample standard
  /// deviation. Zero keeps initialization fully deterministic and seed-free.
  double init_jitter = 0.0;
  FeatureKind feature_kind = FeatureKind::kValidRatio;
};

/// Fraction of pixels whose ground truth is valid.
double valid_ratio(const DepthMap& gt);

/**
 * Fits a k-component 1-D GMM by expectation-maximization.
 *
 * Means start at the (i+0.5)/k sample quantiles, weights uniform, variances
 * at the sample variance; variances never drop below kVarianceFloor. The loop
 * stops once the mean log-likelihood improves by less than `tol`.
 *
 * Throws kInsufficientData if features.size() < k or k == 0, and
 * kInvalidFeature on a non-finite feature.
 */
GmmModel fit_gmm_1d(std::span<const double> features, const GmmOptions& opts);

/// Mean per-sample log-likelihood of `features` under `model`.
double mean_log_likelihood(const GmmModel& model,
                           std::span<const double> features);

/// Posterior responsibility of each component for one feature value.
std::vector<double> responsibilities(const GmmModel& model, double feature);

/// Hard assignment: argmax posterior, ties to the lowest index.
std::vector<std::size_t> assign(const GmmModel& model,
                                std::span<const double> features);

/// Component ordering from hardest to easiest.
struct DifficultyLabeling {
  /// component index for Hard, Medium, Easy
  std::array<std::size_t, 3> component_of{};

  Difficulty difficulty_of(std::size_t component) const;
};

/// Requires k == 3 (throws kUnsupportedK otherwise).
DifficultyLabeling label_difficulty(const GmmModel& model);

/// Component indices sorted hardest first, for any k. Ties resolve by
/// ascending component index.
std::vector<std::size_t> difficulty_order(const GmmModel& model);

struct ClusterSummary {
  std::size_t count = 0;
  std::optional<MetricSet> metrics;  // absent when count == 0
};

using StratifiedReport = std::map<Difficulty, ClusterSummary>;

/// Groups frames by difficulty and frame-mean aggregates each group.
/// Every difficulty is present in the result; empty ones carry no metrics.
/// Throws kShapeError if the lists differ in length.
StratifiedReport stratified_report(std::span<const std::size_t> labels,
                                   const DifficultyLabeling& difficulty,
                                   std::span<const MetricSet> per_frame);

/// JSON round trip: {k, weights, means, variances, feature_kind, labeling}.
std::string gmm_to_json(const GmmModel& model);
GmmModel gmm_from_json(std::string_view text);

}  // namespace stratdepth
