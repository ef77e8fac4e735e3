#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "stratdepth/metrics.hpp"
#include "stratdepth/pose.hpp"
#include "stratdepth/stratify.hpp"

namespace stratdepth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitUsage = 64;

/// Bad flag values; maps to exit code 64.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::optional<std::filesystem::path> csv_out;
  EvalOptions eval;
  double depth_scale = 1.0;
  std::size_t jobs = 1;
};

struct EvaluateOptions : CommonOptions {};

struct StratifyOptions : CommonOptions {
  FeatureKind feature = FeatureKind::kValidRatio;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::size_t max_iter = 500;
  double init_jitter = 0.0;
  std::optional<std::filesystem::path> model_in;
  std::optional<std::filesystem::path> model_out;
};

struct WarpOptions {
  std::filesystem::path image;
  std::filesystem::path depth;
  std::filesystem::path rig;
  std::filesystem::path out;
  std::optional<std::filesystem::path> mask_out;
  std::optional<std::filesystem::path> target;
  double alpha = 0.85;
  double lambda = 1e-3;
  double depth_scale = 1.0;
};

struct DvloraCheckOptions {
  std::size_t d_in = 5;
  std::size_t d_out = 4;
  std::size_t rank = 2;
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::size_t batch = 3;
};

struct AteOptions {
  std::filesystem::path gt;
  std::filesystem::path est;
  Alignment align = Alignment::kSe3;
  std::optional<std::filesystem::path> out;
};

Alignment alignment_from_string(const std::string& s);
std::string to_string(Alignment a);
Scaling scaling_from_string(const std::string& s);
std::string to_string(Scaling s);

// Each command writes its machine-readable summary to `out` and returns the
// process exit code. Library errors surface as stratdepth::Error.
int run_evaluate(const EvaluateOptions& opts, std::ostream& out);
int run_stratify(const StratifyOptions& opts, std::ostream& out);
int run_warp(const WarpOptions& opts, std::ostream& out);
int run_dvlora_check(const DvloraCheckOptions& opts, std::ostream& out);
int run_ate(const AteOptions& opts, std::ostream& out);

/// Runs `fn`, logging failures and mapping them onto exit codes.
template <typename Fn>
int guarded(Fn&& fn);

void init_logging();

}  // namespace stratdepth::cli

#include "guarded.inl"
