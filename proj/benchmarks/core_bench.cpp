#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stratdepth/dvlora.hpp"
#include "stratdepth/io.hpp"
#include "stratdepth/losses.hpp"
#include "stratdepth/metrics.hpp"
#include "stratdepth/stratify.hpp"

namespace sd = stratdepth;

namespace {

sd::DepthMap random_depth(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_real_distribution<double> u(1.0, 150.0);
  std::vector<double> v(w * h);
  for (double& x : v) x = u(rng);
  return sd::DepthMap::from_values(w, h, std::move(v));
}

sd::Image random_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sd::Image img(w, h, 3);
  for (double& x : img.values) x = u(rng);
  return img;
}

void BM_ComputeMetrics(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const auto gt = random_depth(rng, side, side);
  const auto pred = random_depth(rng, side, side);
  sd::EvalOptions o;
  o.scaling = sd::Scaling::kMedian;
  for (auto _ : state) benchmark::DoNotOptimize(sd::compute_metrics(pred, gt, o));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(side * side));
}
BENCHMARK(BM_ComputeMetrics)->Arg(64)->Arg(256)->Arg(512);

void BM_Ssim(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const auto a = random_image(rng, side, side);
  const auto b = random_image(rng, side, side);
  for (auto _ : state) benchmark::DoNotOptimize(sd::ssim(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(side * side));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256);

void BM_Warp(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  const auto src = random_image(rng, side, side);
  const auto depth = random_depth(rng, side, side);
  sd::CameraRig rig;
  rig.fx = rig.fy = static_cast<double>(side);
  rig.cx = rig.cy = static_cast<double>(side) / 2.0;
  rig.translation = {0.5, 0.1, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(sd::warp(src, depth, rig));
}
BENCHMARK(BM_Warp)->Arg(64)->Arg(256);

void BM_FitGmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.02);
  const double means[3] = {0.2, 0.35, 0.53};
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = means[i % 3] + noise(rng);
  for (auto _ : state) benchmark::DoNotOptimize(sd::fit_gmm_1d(x, sd::GmmOptions{}));
}
BENCHMARK(BM_FitGmm)->Arg(300)->Arg(3000);

void BM_DvLoraForward(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto layer = sd::random_layer(d, d, 8, 5);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d), 16);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  sd::ForwardCost cost;
  for (auto _ : state) benchmark::DoNotOptimize(sd::forward(layer, x, &cost));
  state.counters["adapter_macs_per_call"] =
      static_cast<double>(cost.adapter_macs) / static_cast<double>(state.iterations());
}
BENCHMARK(BM_DvLoraForward)->Arg(64)->Arg(256);

void BM_ParsePfm(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  sd::FloatGrid g{side, side, std::vector<float>(side * side, 1.5f), 0};
  const auto bytes = sd::pfm_bytes(g);
  for (auto _ : state) benchmark::DoNotOptimize(sd::parse_pfm(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(bytes.size()));
}
BENCHMARK(BM_ParsePfm)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
