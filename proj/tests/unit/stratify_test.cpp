#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "expect_error.hpp"
#include "oracles.hpp"
#include "stratdepth/stratify.hpp"

namespace stratdepth {
namespace {

std::vector<double> mixture(std::mt19937_64& rng, const std::vector<double>& means,
                            double sd, std::size_t per_component,
                            std::vector<std::size_t>* truth = nullptr) {
  std::vector<double> x;
  for (std::size_t c = 0; c < means.size(); ++c) {
    std::normal_distribution<double> n(means[c], sd);
    for (std::size_t i = 0; i < per_component; ++i) {
      x.push_back(n(rng));
      if (truth) truth->push_back(c);
    }
  }
  return x;
}

GmmModel model3(std::vector<double> means, FeatureKind kind) {
  GmmModel m;
  m.k = 3;
  m.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  m.means = std::move(means);
  m.variances = {1e-4, 1e-4, 1e-4};
  m.feature_kind = kind;
  return m;
}

TEST(ValidRatio, CountsValidPixels) {
  EXPECT_EQ(valid_ratio(DepthMap(2, 2, {1, 1, 1, 1}, {1, 1, 1, 1})), 1.0);
  EXPECT_EQ(valid_ratio(DepthMap(2, 2, {1, 1, 1, 1}, {1, 0, 1, 0})), 0.5);
}

TEST(FitGmm, SingleComponentIsSampleMoments) {
  const std::vector<double> x{0.1, 0.4, 0.25, 0.3, 0.9};
  GmmOptions o;
  o.k = 1;
  const auto m = fit_gmm_1d(x, o);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / 5;
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= 5;
  EXPECT_EQ(m.weights[0], 1.0);
  EXPECT_NEAR(m.means[0], mean, 1e-12);
  EXPECT_NEAR(m.variances[0], var, 1e-12);
}

TEST(FitGmm, RecoversTwoSeparatedComponents) {
  std::mt19937_64 rng(42);
  const auto x = mixture(rng, {0.20, 0.53}, 0.01, 100);
  GmmOptions o;
  o.k = 2;
  const auto m = fit_gmm_1d(x, o);
  std::vector<double> means = m.means;
  std::sort(means.begin(), means.end());
  EXPECT_NEAR(means[0], 0.20, 0.02);
  EXPECT_NEAR(means[1], 0.53, 0.02);
  EXPECT_NEAR(m.weights[0], 0.5, 0.1);
  EXPECT_NEAR(m.weights[1], 0.5, 0.1);
  EXPECT_TRUE(m.converged);
}

TEST(FitGmm, DegenerateInputHitsVarianceFloor) {
  const std::vector<double> x(20, 0.37);
  GmmOptions o;
  o.k = 2;
  const auto m = fit_gmm_1d(x, o);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_DOUBLE_EQ(m.means[c], 0.37);
    EXPECT_EQ(m.variances[c], kVarianceFloor);
    EXPECT_TRUE(std::isfinite(m.weights[c]));
  }
  for (double ll : m.log_likelihood_trace) EXPECT_TRUE(std::isfinite(ll));
}

TEST(FitGmm, LogLikelihoodIsMonotone) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    // Overlapping components make EM take many steps.
    const auto x = mixture(rng, {0.2, 0.28, 0.4}, 0.05, 60);
    GmmOptions o;
    o.tol = 1e-12;
    const auto m = fit_gmm_1d(x, o);
    ASSERT_GE(m.log_likelihood_trace.size(), 2u);
    for (std::size_t i = 1; i < m.log_likelihood_trace.size(); ++i) {
      EXPECT_GE(m.log_likelihood_trace[i], m.log_likelihood_trace[i - 1] - 1e-9);
    }
    EXPECT_NEAR(mean_log_likelihood(m, x), m.log_likelihood_trace.back(), 1e-12);
  }
}

TEST(FitGmm, DeterministicForFixedSeed) {
  std::mt19937_64 rng(4);
  const auto x = mixture(rng, {0.1, 0.5, 0.9}, 0.05, 30);
  GmmOptions o;
  o.seed = 99;
  o.init_jitter = 0.1;
  const auto a = fit_gmm_1d(x, o);
  const auto b = fit_gmm_1d(x, o);
  EXPECT_EQ(a.means, b.means);
  EXPECT_EQ(a.variances, b.variances);
  EXPECT_EQ(a.weights, b.weights);
}

TEST(FitGmm, Errors) {
  GmmOptions o;
  o.k = 3;
  expect_code(ErrorCode::kInsufficientData,
              [&] { fit_gmm_1d(std::vector<double>{1, 2}, o); });
  expect_code(ErrorCode::kInvalidFeature, [&] {
    fit_gmm_1d(std::vector<double>{1, 2, std::nan(""), 4}, o);
  });
  o.k = 0;
  expect_code(ErrorCode::kInsufficientData,
              [&] { fit_gmm_1d(std::vector<double>{1, 2}, o); });
}

TEST(Assign, FeatureAtMeanPicksThatComponent) {
  const auto m = model3({0.2, 0.35, 0.53}, FeatureKind::kValidRatio);
  EXPECT_EQ(assign(m, std::vector<double>{0.2, 0.35, 0.53}),
            (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Assign, SingleComponentTakesEverything) {
  GmmModel m;
  m.k = 1;
  m.weights = {1};
  m.means = {0};
  m.variances = {1};
  const auto a = assign(m, std::vector<double>{-100, 0, 3, 1e3});
  EXPECT_EQ(a, std::vector<std::size_t>(4, 0));
}

TEST(Assign, TiesGoToLowestIndex) {
  auto m = model3({0.5, 0.5, 0.5}, FeatureKind::kValidRatio);
  EXPECT_EQ(assign(m, std::vector<double>{0.5, 0.1}),
            (std::vector<std::size_t>{0, 0}));
}

TEST(Assign, MatchesBrutePosterior) {
  std::mt19937_64 rng(8);
  auto m = model3({0.2, 0.35, 0.53}, FeatureKind::kValidRatio);
  m.variances = {0.003, 0.001, 0.005};
  m.weights = {0.5, 0.2, 0.3};
  std::uniform_real_distribution<double> u(0.0, 0.8);
  std::vector<double> x(100);
  for (double& v : x) v = u(rng);
  const auto got = assign(m, x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(got[i], oracle::posterior_argmax(m, x[i])) << x[i];
  }
}

TEST(Assign, RejectsNonFinite) {
  const auto m = model3({0.2, 0.35, 0.53}, FeatureKind::kValidRatio);
  expect_code(ErrorCode::kInvalidFeature,
              [&] { assign(m, std::vector<double>{INFINITY}); });
}

TEST(Responsibilities, SumToOne) {
  auto m = model3({0.2, 0.35, 0.53}, FeatureKind::kValidRatio);
  m.variances = {0.01, 0.02, 0.005};
  for (double x = -1.0; x <= 2.0; x += 0.01) {
    const auto r = responsibilities(m, x);
    EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(GmmProperties, PermutationInvariance) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    const auto x = mixture(rng, {0.2, 0.35, 0.53}, 0.02, 40);
    std::vector<std::size_t> perm(x.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> px(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) px[i] = x[perm[i]];
    GmmOptions o;
    const auto a = fit_gmm_1d(x, o);
    const auto b = fit_gmm_1d(px, o);
    const auto la = assign(a, x);
    const auto lb = assign(b, px);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(lb[i], la[perm[i]]);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(a.means[c], b.means[c], 1e-9);
  }
}

TEST(GmmProperties, ShiftEquivariance) {
  std::mt19937_64 rng(22);
  for (double shift : {-0.5, 0.25, 3.0}) {
    const auto x = mixture(rng, {0.2, 0.35, 0.53}, 0.02, 40);
    std::vector<double> sx(x);
    for (double& v : sx) v += shift;
    GmmOptions o;
    const auto a = fit_gmm_1d(x, o);
    const auto b = fit_gmm_1d(sx, o);
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_NEAR(b.means[c], a.means[c] + shift, 1e-8);
    }
    EXPECT_EQ(assign(a, x), assign(b, sx));
  }
}

TEST(LabelDifficulty, ValidRatioLowIsHard) {
  const auto l = label_difficulty(model3({0.20, 0.35, 0.53}, FeatureKind::kValidRatio));
  EXPECT_EQ(l.difficulty_of(0), Difficulty::kHard);
  EXPECT_EQ(l.difficulty_of(1), Difficulty::kMedium);
  EXPECT_EQ(l.difficulty_of(2), Difficulty::kEasy);
}

TEST(LabelDifficulty, BaselineErrorHighIsHard) {
  const auto l =
      label_difficulty(model3({0.088, 0.05, 0.035}, FeatureKind::kBaselineError));
  EXPECT_EQ(l.difficulty_of(0), Difficulty::kHard);
  EXPECT_EQ(l.difficulty_of(1), Difficulty::kMedium);
  EXPECT_EQ(l.difficulty_of(2), Difficulty::kEasy);
}

TEST(LabelDifficulty, UnorderedComponents) {
  const auto l = label_difficulty(model3({0.53, 0.20, 0.35}, FeatureKind::kValidRatio));
  EXPECT_EQ(l.component_of, (std::array<std::size_t, 3>{1, 2, 0}));
}

TEST(LabelDifficulty, EqualMeansBreakTiesByIndex) {
  for (auto kind : {FeatureKind::kValidRatio, FeatureKind::kBaselineError}) {
    const auto l = label_difficulty(model3({0.3, 0.3, 0.3}, kind));
    EXPECT_EQ(l.component_of, (std::array<std::size_t, 3>{0, 1, 2}));
  }
}

TEST(LabelDifficulty, RequiresThreeComponents) {
  GmmModel m;
  m.k = 2;
  m.weights = {0.5, 0.5};
  m.means = {0, 1};
  m.variances = {1, 1};
  expect_code(ErrorCode::kUnsupportedK, [&] { label_difficulty(m); });
}

MetricSet frame(double abs_rel, double rmse) {
  MetricSet m;
  m.abs_rel = abs_rel;
  m.rmse = rmse;
  m.delta1 = 1 - abs_rel;
  m.delta2 = m.delta3 = 1;
  m.n_pixels = 10;
  return m;
}

TEST(StratifiedReport, OneClusterEqualsGlobal) {
  const std::vector<MetricSet> f{frame(0.1, 2), frame(0.2, 3), frame(0.05, 1)};
  const DifficultyLabeling lab{{2, 0, 1}};
  const std::vector<std::size_t> labels(3, 0);  // component 0 is Medium
  const auto r = stratified_report(labels, lab, f);
  EXPECT_EQ(r.at(Difficulty::kMedium).count, 3u);
  EXPECT_EQ(*r.at(Difficulty::kMedium).metrics, aggregate(f));
  EXPECT_EQ(r.at(Difficulty::kHard).count, 0u);
  EXPECT_FALSE(r.at(Difficulty::kHard).metrics.has_value());
  EXPECT_FALSE(r.at(Difficulty::kEasy).metrics.has_value());
}

TEST(StratifiedReport, GroupMeansMatchBruteForce) {
  const std::vector<MetricSet> f{frame(0.1, 2), frame(0.2, 3),  frame(0.05, 1),
                                 frame(0.3, 5), frame(0.07, 2), frame(0.15, 4)};
  const std::vector<std::size_t> labels{0, 1, 2, 0, 2, 1};
  const DifficultyLabeling lab{{0, 1, 2}};
  const auto r = stratified_report(labels, lab, f);
  const auto hard = oracle::mean_of({f[0], f[3]});
  const auto med = oracle::mean_of({f[1], f[5]});
  const auto easy = oracle::mean_of({f[2], f[4]});
  EXPECT_LT(oracle::max_metric_diff(*r.at(Difficulty::kHard).metrics, hard), 1e-12);
  EXPECT_LT(oracle::max_metric_diff(*r.at(Difficulty::kMedium).metrics, med), 1e-12);
  EXPECT_LT(oracle::max_metric_diff(*r.at(Difficulty::kEasy).metrics, easy), 1e-12);
  EXPECT_NEAR(r.at(Difficulty::kHard).metrics->abs_rel, 0.2, 1e-15);
}

TEST(StratifiedReport, LengthMismatchThrows) {
  const DifficultyLabeling lab{{0, 1, 2}};
  expect_code(ErrorCode::kShapeError, [&] {
    stratified_report(std::vector<std::size_t>{0}, lab, std::vector<MetricSet>{});
  });
}

TEST(GmmJson, RoundTrip) {
  std::mt19937_64 rng(2);
  const auto x = mixture(rng, {0.2, 0.35, 0.53}, 0.01, 50);
  GmmOptions o;
  o.feature_kind = FeatureKind::kBaselineError;
  const auto m = fit_gmm_1d(x, o);
  const auto back = gmm_from_json(gmm_to_json(m));
  EXPECT_EQ(back.k, m.k);
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.means, m.means);
  EXPECT_EQ(back.variances, m.variances);
  EXPECT_EQ(back.feature_kind, FeatureKind::kBaselineError);
  EXPECT_EQ(assign(back, x), assign(m, x));
}

TEST(GmmJson, RejectsInconsistentDocuments) {
  expect_code(ErrorCode::kFormatError, [] { gmm_from_json("{}"); });
  expect_code(ErrorCode::kFormatError, [] {
    gmm_from_json(R"({"k":2,"weights":[0.7,0.7],"means":[0,1],)"
                  R"("variances":[1,1],"feature_kind":"valid_ratio"})");
  });
  expect_code(ErrorCode::kFormatError, [] {
    gmm_from_json(R"({"k":1,"weights":[1],"means":[0],)"
                  R"("variances":[0],"feature_kind":"valid_ratio"})");
  });
}

}  // namespace
}  // namespace stratdepth
