#include "stratdepth/stratify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <json.hpp>

#include "stratdepth/error.hpp"

namespace stratdepth {

using nlohmann::json;

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::kValidRatio ? "valid_ratio" : "baseline_error";
}

FeatureKind feature_kind_from_string(std::string_view name) {
  if (name == "valid_ratio" || name == "valid-ratio") {
    return FeatureKind::kValidRatio;
  }
  if (name == "baseline_error" || name == "baseline-error") {
    return FeatureKind::kBaselineError;
  }
  throw Error(ErrorCode::kValidationError,
              "unknown feature kind '" + std::string(name) + "'");
}

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kHard: return "Hard";
    case Difficulty::kMedium: return "Medium";
    case Difficulty::kEasy: return "Easy";
  }
  return "Unknown";
}

double valid_ratio(const DepthMap& gt) {
  if (gt.size() == 0) {
    throw Error(ErrorCode::kShapeError, "valid ratio of an empty map");
  }
  return static_cast<double>(gt.valid_count()) /
         static_cast<double>(gt.size());
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_finite(std::span<const double> features) {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) {
      throw Error(ErrorCode::kInvalidFeature,
                  "feature " + std::to_string(i) + " is not finite");
    }
  }
}

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

// Per-component log(w_k) + log N(x | k). Zero-weight components get -inf.
void log_joint(const GmmModel& m, double x, std::vector<double>& out) {
  out.resize(m.k);
  for (std::size_t c = 0; c < m.k; ++c) {
    out[c] = m.weights[c] > 0.0
                 ? std::log(m.weights[c]) + log_normal(x, m.means[c],
                                                       m.variances[c])
                 : kNegInf;
  }
}

double log_sum_exp(const std::vector<double>& v) {
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double e : v) s += std::exp(e - hi);
  return hi + std::log(s);
}

}  // namespace

double mean_log_likelihood(const GmmModel& model,
                           std::span<const double> features) {
  std::vector<double> lj;
  double total = 0.0;
  for (double x : features) {
    log_joint(model, x, lj);
    total += log_sum_exp(lj);
  }
  return total / static_cast<double>(features.size());
}

std::vector<double> responsibilities(const GmmModel& model, double feature) {
  if (!std::isfinite(feature)) {
    throw Error(ErrorCode::kInvalidFeature, "feature is not finite");
  }
  std::vector<double> lj;
  log_joint(model, feature, lj);
  const double norm = log_sum_exp(lj);
  for (double& e : lj) e = std::exp(e - norm);
  return lj;
}

GmmModel fit_gmm_1d(std::span<const double> features,
                    const GmmOptions& opts) {
  const std::size_t n = features.size();
  const std::size_t k = opts.k;
  if (k == 0 || n < k) {
    throw Error(ErrorCode::kInsufficientData,
                std::to_string(n) + " samples for " + std::to_string(k) +
                    " components");
  }
  check_finite(features);

  const double mean = std::accumulate(features.begin(), features.end(), 0.0) /
                      static_cast<double>(n);
  double var = 0.0;
  for (double x : features) var += (x - mean) * (x - mean);
  var = std::max(var / static_cast<double>(n), kVarianceFloor);

  std::vector<double> sorted(features.begin(), features.end());
  std::sort(sorted.begin(), sorted.end());

  GmmModel m;
  m.k = k;
  m.feature_kind = opts.feature_kind;
  m.weights.assign(k, 1.0 / static_cast<double>(k));
  m.variances.assign(k, var);
  m.means.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double q = (static_cast<double>(c) + 0.5) / static_cast<double>(k);
    const auto at = std::min(
        n - 1, static_cast<std::size_t>(q * static_cast<double>(n)));
    m.means[c] = sorted[at];
  }
  if (opts.init_jitter > 0.0) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> noise(0.0,
                                           opts.init_jitter * std::sqrt(var));
    for (double& mu : m.means) mu += noise(rng);
  }

  std::vector<double> resp(n * k);
  std::vector<double> lj;
  auto e_step = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      log_joint(m, features[i], lj);
      const double norm = log_sum_exp(lj);
      total += norm;
      for (std::size_t c = 0; c < k; ++c) {
        resp[i * k + c] = std::exp(lj[c] - norm);
      }
    }
    return total / static_cast<double>(n);
  };

  double ll = e_step();
  m.log_likelihood_trace.push_back(ll);
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0, sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i * k + c];
        sx += resp[i * k + c] * features[i];
      }
      m.weights[c] = nk / static_cast<double>(n);
      // An emptied component keeps its previous mean and variance.
      if (nk <= 0.0) continue;
      const double mu = sx / nk;
      double sv = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = features[i] - mu;
        sv += resp[i * k + c] * d * d;
      }
      m.means[c] = mu;
      m.variances[c] = std::max(sv / nk, kVarianceFloor);
    }
    const double wsum =
        std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
    for (double& w : m.weights) w /= wsum;

    const double next = e_step();
    m.log_likelihood_trace.push_back(next);
    m.iterations = it;
    if (next - ll < opts.tol) {
      m.converged = true;
      break;
    }
    ll = next;
  }
  return m;
}

std::vector<std::size_t> assign(const GmmModel& model,
                                std::span<const double> features) {
  check_finite(features);
  std::vector<std::size_t> out;
  out.reserve(features.size());
  std::vector<double> lj;
  for (double x : features) {
    log_joint(model, x, lj);
    // max_element returns the first maximum, which is the lowest index.
    out.push_back(static_cast<std::size_t>(
        std::max_element(lj.begin(), lj.end()) - lj.begin()));
  }
  return out;
}

std::vector<std::size_t> difficulty_order(const GmmModel& model) {
  std::vector<std::size_t> order(model.k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool low_is_hard = model.feature_kind == FeatureKind::kValidRatio;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return low_is_hard ? model.means[a] < model.means[b]
                                        : model.means[a] > model.means[b];
                   });
  return order;
}

Difficulty DifficultyLabeling::difficulty_of(std::size_t component) const {
  for (std::size_t d = 0; d < 3; ++d) {
    if (component_of[d] == component) return static_cast<Difficulty>(d);
  }
  throw Error(ErrorCode::kValidationError,
              "component " + std::to_string(component) + " is not labeled");
}

DifficultyLabeling label_difficulty(const GmmModel& model) {
  if (model.k != 3) {
    throw Error(ErrorCode::kUnsupportedK,
                "difficulty labeling needs k=3, got k=" +
                    std::to_string(model.k));
  }
  const auto order = difficulty_order(model);
  return DifficultyLabeling{{order[0], order[1], order[2]}};
}

StratifiedReport stratified_report(std::span<const std::size_t> labels,
                                   const DifficultyLabeling& difficulty,
                                   std::span<const MetricSet> per_frame) {
  if (labels.size() != per_frame.size()) {
    throw Error(ErrorCode::kShapeError,
                std::to_string(labels.size()) + " labels for " +
                    std::to_string(per_frame.size()) + " frames");
  }
  std::map<Difficulty, std::vector<MetricSet>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    groups[difficulty.difficulty_of(labels[i])].push_back(per_frame[i]);
  }
  StratifiedReport report;
  for (auto d : {Difficulty::kHard, Difficulty::kMedium, Difficulty::kEasy}) {
    auto& summary = report[d];
    const auto it = groups.find(d);
    if (it == groups.end()) continue;
    summary.count = it->second.size();
    summary.metrics = aggregate(it->second);
  }
  return report;
}

std::string gmm_to_json(const GmmModel& model) {
  json j;
  j["k"] = model.k;
  j["weights"] = model.weights;
  j["means"] = model.means;
  j["variances"] = model.variances;
  j["feature_kind"] = std::string(to_string(model.feature_kind));
  j["difficulty_order"] = difficulty_order(model);
  if (model.k == 3) {
    const auto lab = label_difficulty(model);
    json l;
    for (std::size_t d = 0; d < 3; ++d) {
      l[std::string(to_string(static_cast<Difficulty>(d)))] =
          lab.component_of[d];
    }
    j["labeling"] = l;
  }
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  return j.dump(2);
}

GmmModel gmm_from_json(std::string_view text) {
  GmmModel m;
  try {
    const json j = json::parse(text);
    m.k = j.at("k").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.means = j.at("means").get<std::vector<double>>();
    m.variances = j.at("variances").get<std::vector<double>>();
    m.feature_kind =
        feature_kind_from_string(j.at("feature_kind").get<std::string>());
    m.iterations = j.value("iterations", std::size_t{0});
    m.converged = j.value("converged", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError,
                std::string("GMM document: ") + e.what());
  }
  if (m.k == 0 || m.weights.size() != m.k || m.means.size() != m.k ||
      m.variances.size() != m.k) {
    throw Error(ErrorCode::kFormatError,
                "GMM document: parameter lists do not match k");
  }
  double wsum = 0.0;
  for (std::size_t c = 0; c < m.k; ++c) {
    if (!(m.weights[c] >= 0.0) || !std::isfinite(m.means[c]) ||
        !(m.variances[c] >= kVarianceFloor) ||
        !std::isfinite(m.variances[c])) {
      throw Error(ErrorCode::kFormatError,
                  "GMM document: component " + std::to_string(c) +
                      " has invalid parameters");
    }
    wsum += m.weights[c];
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kFormatError, "GMM document: weights do not sum to 1");
  }
  return m;
}

}  // namespace stratdepth
